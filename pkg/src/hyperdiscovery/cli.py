"""Subcommand front-end: ingest -> graph -> walks -> scores -> fuse -> predict
-> evaluate, plus the graph-autoencoder trainer.

One stage per invocation with file handoffs.  Settings merge as: built-in
defaults < --config JSON < HYPERDISCOVERY_* environment variables < explicit
flags.  Every artifact embeds the effective config hash and seed, and a rerun
with the same settings is byte-identical.

Exit codes: 0 success, 1 validation/config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import corpus as corpus_mod
from . import embedding as emb
from . import evaluation as ev
from . import gnn
from . import hypergraph as hg
from . import scoring as sc
from . import social_density as sd
from . import transition as tr
from . import walks as wk
from .errors import DomainError, FormatError, ValidationError

ENV_PREFIX = "HYPERDISCOVERY_"


@dataclass
class RunConfig:
    corpus: str | None = None
    keywords: str | None = None
    t: int | None = None
    k: int = 50
    gamma: int = 5
    alpha: float = 1.0
    beta: float = 0.5
    beta_grid: tuple[float, ...] = ev.DEFAULT_BETA_GRID
    method: str = "vdw_z"
    min_mentions: int = 3
    label_window: int = 5
    walk_length: int = 20
    walks_per_start: int = 10
    window: int = 8
    exclude_self: bool = False
    canonical_ids: bool = False
    seed: int = 0
    workers: int = 1
    outdir: str = "out"
    sd_method: str = "sum"
    spd_projection: str = "full"
    sg_dim: int = 64
    sg_epochs: int = 5
    sg_lr: float = 0.025
    sg_negatives: int = 5
    shift_k: float = 1.0
    alpha_mix: float = 0.0
    gnn_setting: str = "full"
    gnn_dims: tuple[int, ...] = (64, 64, 16)
    gnn_sample_sizes: tuple[int, ...] = (25, 10)
    gnn_batch_size: int = 1000
    gnn_negatives: int = 15
    gnn_lr: float = 5e-6
    gnn_steps: int = 2000
    gnn_include_self: bool = True

    def validate(self) -> "RunConfig":
        checks = [
            (self.k >= 1, "k must be >= 1"),
            (self.gamma >= 1, "gamma must be >= 1"),
            (self.alpha >= 0, "alpha must be >= 0"),
            (0.0 <= self.beta <= 1.0, "beta must lie in [0, 1]"),
            (all(0.0 <= b <= 1.0 for b in self.beta_grid),
             "beta_grid values must lie in [0, 1]"),
            (self.method in sc.FUSION_METHODS,
             f"method must be one of {sc.FUSION_METHODS}"),
            (self.min_mentions >= 0, "min_mentions must be >= 0"),
            (self.walk_length >= 2, "walk_length must be >= 2"),
            (self.walks_per_start >= 1, "walks_per_start must be >= 1"),
            (self.window >= 1, "window must be >= 1"),
            (self.seed >= 0, "seed must be >= 0"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.sd_method in ("sum", "rand", "class"),
             "sd_method must be sum, rand, or class"),
            (self.spd_projection in ("full", "concepts"),
             "spd_projection must be full or concepts"),
            (self.gnn_setting in ("full", "author_less"),
             "gnn_setting must be full or author_less"),
            (self.gnn_lr > 0 and self.sg_lr > 0, "learning rates must be positive"),
            (self.gnn_steps >= 1, "gnn_steps must be >= 1"),
            (self.shift_k > 0, "shift_k must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValidationError(msg)
        return self


_TUPLE_FIELDS = {"beta_grid": float, "gnn_dims": int, "gnn_sample_sizes": int}
_BOOL_FIELDS = {"exclude_self", "canonical_ids", "gnn_include_self"}
_NONE_FIELD_TYPES = {"corpus": str, "keywords": str, "t": int}


def _coerce(name: str, value, target_type):
    if name in _TUPLE_FIELDS:
        elem = _TUPLE_FIELDS[name]
        if isinstance(value, str):
            value = [p for p in value.split(",") if p]
        return tuple(elem(v) for v in value)
    if name in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        return str(value).lower() in ("1", "true", "yes", "on")
    if target_type is int:
        if isinstance(value, bool) or (isinstance(value, float) and value != int(value)):
            raise ValueError(f"{value!r} is not an integer")
        return int(value)
    if target_type is float:
        return float(value)
    return value


def _read_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    return data


def validate_config(path) -> RunConfig:
    """Parse and range-check a JSON config file."""
    return _apply_overrides(RunConfig(), _read_config_file(path),
                            source=str(path)).validate()


def _apply_overrides(cfg: RunConfig, data: dict, source: str) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    defaults = RunConfig()
    updates = {}
    for name, value in data.items():
        if name not in known:
            raise ValidationError(f"{source}: unknown config field {name!r}")
        default = getattr(defaults, name)
        base_type = _NONE_FIELD_TYPES.get(name, type(default))
        try:
            updates[name] = _coerce(name, value, base_type)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{source}: bad value for {name!r}: {value!r}") from exc
    return replace(cfg, **updates)


def _env_overrides() -> dict:
    out = {}
    names = {f.name for f in fields(RunConfig)}
    for key, value in os.environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in names:
                out[name] = value
    return out


def effective_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = _apply_overrides(cfg, _read_config_file(args.config),
                               source=args.config)
    env = _env_overrides()
    if env:
        cfg = _apply_overrides(cfg, env, source="environment")
    cli = {
        name: getattr(args, name)
        for name in (f.name for f in fields(RunConfig))
        if getattr(args, name, None) is not None
    }
    cfg = _apply_overrides(cfg, cli, source="command line")
    return cfg.validate()


def config_hash(cfg: RunConfig) -> str:
    # outdir does not affect artifact content, so it stays out of the hash
    payload = {k: v for k, v in asdict(cfg).items() if k != "outdir"}
    blob = json.dumps(payload, sort_keys=True, default=list)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=list)
        fh.write("\n")


def _echo_config(cfg: RunConfig, stage: str) -> str:
    os.makedirs(cfg.outdir, exist_ok=True)
    h = config_hash(cfg)
    payload = asdict(cfg)
    payload.update({"stage": stage, "config_hash": h})
    _write_json(os.path.join(cfg.outdir, f"{stage}.config.json"), payload)
    return h


def _stamp(cfg: RunConfig, h: str) -> str:
    return f"config_hash={h} seed={cfg.seed}"


def _load_corpus(cfg: RunConfig) -> corpus_mod.Corpus:
    if not cfg.corpus or not cfg.keywords:
        raise ValidationError("this stage needs --corpus and --keywords")
    keywords = corpus_mod.read_keywords(cfg.keywords)
    return corpus_mod.read_corpus(cfg.corpus, keywords)


def _require_t(cfg: RunConfig) -> int:
    if cfg.t is None:
        raise ValidationError("this stage needs --t (prediction year)")
    return cfg.t


# --- stages -----------------------------------------------------------------


def cmd_ingest(cfg: RunConfig) -> None:
    c = _load_corpus(cfg)
    h = _echo_config(cfg, "ingest")
    years = [r.year for r in c.records]
    stats = {
        "config_hash": h,
        "seed": cfg.seed,
        "records": len(c),
        "year_min": min(years) if years else None,
        "year_max": max(years) if years else None,
        "authors": len({a for r in c.records for a in r.authors}),
        "entities": len({e for r in c.records for e in r.entities}),
        "property_mentions": sum(
            1 for r in c.records if corpus_mod.record_mentions_any(r, c.property_keywords)
        ),
        "keywords": sorted(c.property_keywords),
    }
    _write_json(os.path.join(cfg.outdir, "corpus_stats.json"), stats)
    with open(os.path.join(cfg.outdir, "corpus.normalized.jsonl"), "w",
              encoding="utf-8") as fh:
        for r in c.records:
            fh.write(json.dumps(
                {"id": r.id, "year": r.year, "authors": list(r.authors),
                 "entities": list(r.entities), "tokens": list(r.tokens)},
                sort_keys=True))
            fh.write("\n")


def cmd_graph(cfg: RunConfig) -> None:
    c = _load_corpus(cfg)
    t = _require_t(cfg)
    before, _ = corpus_mod.partition_by_year(c, t)
    graph = hg.build_hypergraph(before, canonical_ids=cfg.canonical_ids)
    h = _echo_config(cfg, "graph")
    hg.save_snapshot(graph, os.path.join(cfg.outdir, "hypergraph.json"))
    _write_json(
        os.path.join(cfg.outdir, "graph_stats.json"),
        {"config_hash": h, "seed": cfg.seed, "nodes": graph.n_nodes,
         "edges": graph.n_edges, "skipped_records": graph.skipped_records},
    )


def _load_graph(args) -> hg.Hypergraph:
    path = getattr(args, "graph", None)
    if not path:
        raise ValidationError("this stage needs --graph (hypergraph snapshot)")
    return hg.load_snapshot(path)


def cmd_transition(cfg: RunConfig, args) -> None:
    graph = _load_graph(args)
    tm = tr.transition_matrix(graph, exclude_self=cfg.exclude_self)
    h = _echo_config(cfg, "transition")
    tr.export_coo(tm, os.path.join(cfg.outdir, "transition.coo.txt"),
                  header_comment=_stamp(cfg, h))
    if args.steps is not None:
        if args.steps < 2:
            raise ValidationError("--steps must be >= 2")
        source = graph.property_node()
        if source is None:
            raise ValidationError("graph has no property node to score from")
        row = tr.author_mediated_row(tm, source, steps=args.steps)
        values = {
            graph.labels[v]: float(row[v])
            for v in graph.nodes_of_kind(hg.NodeKind.MATERIAL)
        }
        table = sc.ScoreTable(values=values, provenance="transition",
                              metadata={"steps": args.steps})
        sc.save_score_csv(table, os.path.join(cfg.outdir, "transition_scores.csv"),
                          header_comment=_stamp(cfg, h))


def cmd_walk(cfg: RunConfig, args) -> None:
    graph = _load_graph(args)
    wcfg = wk.WalkConfig(alpha=cfg.alpha, walk_length=cfg.walk_length,
                         walks_per_start=cfg.walks_per_start,
                         window=cfg.window, seed=cfg.seed)
    wc = wk.generate_walks(graph, wcfg, workers=cfg.workers)
    h = _echo_config(cfg, "walk")
    wk.export_walks(wc, graph.labels, os.path.join(cfg.outdir, "walks.txt"))
    meta = dict(wc.start_policy)
    meta.update({"config_hash": h, "seed": cfg.seed,
                 "sequences": len(wc.sequences),
                 "alpha": "inf" if math.isinf(cfg.alpha) else cfg.alpha})
    _write_json(os.path.join(cfg.outdir, "walks.meta.json"), meta)


def _read_walk_sequences(path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.split() for line in fh if line.strip()]


def cmd_embed(cfg: RunConfig, args) -> None:
    if args.load_hidden:
        # external upstream model: skip training, score straight from disk
        table = emb.load_embedding(args.load_hidden, args.load_output)
        h = _echo_config(cfg, "embed")
    else:
        sequences: list[list[str]] = []
        if args.walks:
            sequences += _read_walk_sequences(args.walks) * max(args.walks_weight, 1)
        if args.sentences_from:
            keywords = corpus_mod.read_keywords(cfg.keywords) if cfg.keywords else ["_"]
            c = corpus_mod.read_corpus(args.sentences_from, keywords)
            sentences = [list(r.tokens) for r in c.records if r.tokens]
            sequences += sentences * max(args.sentences_weight, 1)
        if not sequences:
            raise ValidationError("embed needs --walks, --sentences-from, or --load-hidden")
        if args.drop_authors:
            graph = _load_graph(args)
            author_labels = {
                graph.labels[v] for v in graph.nodes_of_kind(hg.NodeKind.AUTHOR)
            }
            sequences = [[tok for tok in s if tok not in author_labels]
                         for s in sequences]
        pairs = wk.sliding_pairs(sequences, window=cfg.window)
        if not pairs:
            raise ValidationError("no training pairs derived from the inputs")
        counts: dict[str, int] = {}
        for seq in sequences:
            for tok in seq:
                counts[tok] = counts.get(tok, 0) + 1
        sampler = wk.build_negative_sampler(counts, power=0.75)
        sg_cfg = emb.SkipgramConfig(dim=cfg.sg_dim, epochs=cfg.sg_epochs, lr=cfg.sg_lr,
                                    negatives=cfg.sg_negatives, seed=cfg.seed)
        table, trace = emb.train_skipgram(pairs, sampler, sg_cfg)
        h = _echo_config(cfg, "embed")
        emb.save_embedding(table,
                           os.path.join(cfg.outdir, "embedding.hidden.txt"),
                           os.path.join(cfg.outdir, "embedding.output.txt"))
        _write_json(os.path.join(cfg.outdir, "embedding.meta.json"),
                    {"config_hash": h, "seed": cfg.seed, "loss_trace": trace,
                     "vocab_size": len(table.vocabulary), "dim": table.dim})
    if args.property_token:
        if args.property_token not in table.vocabulary:
            raise ValidationError(
                f"property token {args.property_token!r} not in the vocabulary")
        if "output_missing" in table.flags and args.plausibility_mode == "output-hidden":
            raise ValidationError(
                "loaded embedding has no output matrix; pass --load-output or "
                "use --plausibility-mode hidden-hidden")
        if args.graph:
            graph = hg.load_snapshot(args.graph)
            candidates = [
                graph.labels[v]
                for v in graph.nodes_of_kind(hg.NodeKind.MATERIAL)
                if graph.labels[v] in table.vocabulary
            ]
        else:
            candidates = [tok for tok in table.vocabulary if tok != args.property_token]
        values = {
            cand: emb.plausibility_score(table, args.property_token, cand,
                                         mode=args.plausibility_mode)
            for cand in candidates
        }
        score = sc.ScoreTable(values=values, provenance="plausibility",
                              metadata={"property": args.property_token,
                                        "mode": args.plausibility_mode})
        sc.save_score_csv(score, os.path.join(cfg.outdir, "plausibility.csv"),
                          header_comment=_stamp(cfg, h))


def cmd_sppmi(cfg: RunConfig, args) -> None:
    text_seqs: list[list[str]] = []
    if args.sentences_from:
        keywords = corpus_mod.read_keywords(cfg.keywords) if cfg.keywords else ["_"]
        c = corpus_mod.read_corpus(args.sentences_from, keywords)
        text_seqs = [list(r.tokens) for r in c.records if r.tokens]
    if not text_seqs:
        raise ValidationError("sppmi needs --sentences-from with token lists")
    dw_seqs = _read_walk_sequences(args.walks) if args.walks else []
    vocab = sorted({tok for s in text_seqs + dw_seqs for tok in s})
    index = {tok: i for i, tok in enumerate(vocab)}
    text_pairs = [(index[a], index[b])
                  for a, b in wk.sliding_pairs(text_seqs, window=cfg.window)]
    dw_pairs = [(index[a], index[b])
                for a, b in wk.sliding_pairs(dw_seqs, window=cfg.window)] if dw_seqs else []
    dw_vocab_size = len({tok for s in dw_seqs for tok in s}) if dw_seqs else 0
    spec = emb.SppmiSpec.from_pairs(
        text_pairs, vocab_size=len(vocab), dw_pairs=dw_pairs,
        dw_vocab_size=dw_vocab_size, shift_k=cfg.shift_k, alpha_mix=cfg.alpha_mix,
    )
    mat = emb.build_sppmi(spec)
    h = _echo_config(cfg, "sppmi")
    coo = mat.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(os.path.join(cfg.outdir, "sppmi.coo.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg, h)}\n")
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i in order:
            fh.write(f"{coo.row[i]} {coo.col[i]} {float(coo.data[i])!r}\n")
    with open(os.path.join(cfg.outdir, "sppmi.vocab.txt"), "w", encoding="utf-8") as fh:
        for tok in vocab:
            fh.write(tok + "\n")


def cmd_sd(cfg: RunConfig) -> None:
    c = _load_corpus(cfg)
    t = _require_t(cfg)
    before, _ = corpus_mod.partition_by_year(c, t)
    keywords = c.property_keywords
    candidates = sorted(ev.unstudied_set(before, keywords, cfg.min_mentions))
    series = {
        cand: sd.yearwise_sd(before, (cand,), keywords, t, cfg.gamma)
        for cand in candidates
    }
    classifier = None
    rng = None
    if cfg.sd_method == "class":
        X, y, _ = sd.build_sd_training_set(before, keywords, t, cfg.gamma,
                                           cfg.label_window)
        if len(np.unique(y)) < 2:
            raise DomainError(
                "cannot train the SD classifier: need both discovered and "
                "unstudied entities with nonzero SD history"
            )
        classifier = sd.train_sd_classifier(X, y)
    elif cfg.sd_method == "rand":
        rng = np.random.default_rng(cfg.seed)
    table = sd.sd_score(series, method=cfg.sd_method, k=cfg.k, rng=rng,
                        classifier=classifier)
    h = _echo_config(cfg, "sd")
    sc.save_score_csv(table, os.path.join(cfg.outdir, "sd_scores.csv"),
                      header_comment=_stamp(cfg, h))


def cmd_spd(cfg: RunConfig, args) -> None:
    graph = _load_graph(args)
    if cfg.spd_projection == "full":
        adj = hg.projected_adjacency(graph, list(hg.NodeKind))
    else:
        adj = hg.projected_adjacency(
            graph, [hg.NodeKind.MATERIAL, hg.NodeKind.PROPERTY])
    table = sc.shortest_path_distances(graph, adj)
    h = _echo_config(cfg, "spd")
    sc.save_score_csv(table, os.path.join(cfg.outdir, "spd_scores.csv"),
                      header_comment=_stamp(cfg, h))


def _load_pair_tables(args) -> tuple[sc.ScoreTable, sc.ScoreTable]:
    if not args.s1 or not args.s2:
        raise ValidationError("this stage needs --s1 and --s2 score CSVs")
    s1 = sc.load_score_csv(args.s1)
    s2 = sc.load_score_csv(args.s2)
    return s1, s2


def _align(s1: sc.ScoreTable, s2: sc.ScoreTable) -> tuple[sc.ScoreTable, sc.ScoreTable, int]:
    common = set(s1.values) & set(s2.values)
    dropped = len(set(s1.values) | set(s2.values)) - len(common)
    if not common:
        raise ValidationError("score tables share no candidates")
    return s1.restrict(common), s2.restrict(common), dropped


def cmd_fuse(cfg: RunConfig, args) -> None:
    s1, s2, dropped = _align(*_load_pair_tables(args))
    if s1.provenance == "sp_d":
        s1 = sc.apply_sentinel(s1)
    fused = sc.combine_scores(s1, s2, cfg.beta, cfg.method)
    h = _echo_config(cfg, "fuse")
    sc.save_fused_csv(fused, s1, s2, os.path.join(cfg.outdir, "fused.csv"),
                      header_comment=f"{_stamp(cfg, h)} dropped={dropped}")


def cmd_predict(cfg: RunConfig, args) -> None:
    c = _load_corpus(cfg)
    t = _require_t(cfg)
    before, _ = corpus_mod.partition_by_year(c, t)
    unstudied = ev.unstudied_set(before, c.property_keywords, cfg.min_mentions)
    s1, s2 = _load_pair_tables(args)
    s1 = s1.restrict(unstudied)
    s2 = s2.restrict(unstudied)
    s1, s2, dropped = _align(s1, s2)
    if s1.provenance == "sp_d":
        s1 = sc.apply_sentinel(s1)
    fused = sc.combine_scores(s1, s2, cfg.beta, cfg.method)
    predictions = sc.rank_candidates(fused, cfg.k, "max_first")
    h = _echo_config(cfg, "predict")
    report = ev.PredictionReport(
        t=t, k=cfg.k, predictions=tuple(predictions),
        method={**fused.metadata, "s1_provenance": s1.provenance,
                "s2_provenance": s2.provenance},
        flags=("fewer_candidates_than_k",) if len(predictions) < cfg.k else (),
    )
    ev.save_report(report, os.path.join(cfg.outdir, "prediction.json"),
                   extra={"config_hash": h, "seed": cfg.seed,
                          "unstudied_candidates": len(unstudied),
                          "scored_candidates": len(s1),
                          "dropped_candidates": dropped})
    sc.save_fused_csv(fused, s1, s2, os.path.join(cfg.outdir, "predict_scores.csv"),
                      header_comment=_stamp(cfg, h))


def cmd_evaluate(cfg: RunConfig, args) -> None:
    if not args.report:
        raise ValidationError("evaluate needs --report (prediction JSON)")
    report = ev.load_report(args.report)
    c = _load_corpus(cfg)
    _, future = corpus_mod.partition_by_year(c, report.t)
    done = ev.cumulative_hit_rate(report, future, c.property_keywords,
                                  normalize_by_k=not args.normalize_by_len)
    h = _echo_config(cfg, "evaluate")
    ev.save_report(done, os.path.join(cfg.outdir, "evaluated.json"),
                   extra={"config_hash": h, "seed": cfg.seed})
    with open(os.path.join(cfg.outdir, "cumulative.csv"), "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg, h)}\n")
        fh.write("year,hit_rate,cumulative\n")
        for year, cum in zip(sorted(done.per_year), done.cumulative):
            fh.write(f"{year},{done.per_year[year]!r},{cum!r}\n")


def cmd_sweep_beta(cfg: RunConfig, args) -> None:
    s1, s2, dropped = _align(*_load_pair_tables(args))
    methods = tuple(args.methods.split(",")) if args.methods else (
        "vdw_z", "geometric", "harmonic")
    rows = ev.beta_sweep_self_eval(s1, s2, k=cfg.k, betas=cfg.beta_grid,
                                   methods=methods)
    h = _echo_config(cfg, "sweep-beta")
    ev.save_sweep_csv(rows, os.path.join(cfg.outdir, "beta_sweep.csv"),
                      header_comment=f"{_stamp(cfg, h)} dropped={dropped}")


def cmd_gnn_train(cfg: RunConfig, args) -> None:
    graph = _load_graph(args)
    keep = [hg.NodeKind.MATERIAL, hg.NodeKind.PROPERTY]
    if cfg.gnn_setting == "full":
        adj = hg.projected_adjacency(graph, keep, coauthor_augment=True)
        walk_alpha, drop_authors = 1.0, True
    else:
        adj = hg.projected_adjacency(graph, keep, coauthor_augment=False)
        walk_alpha, drop_authors = math.inf, False
    wcfg = wk.WalkConfig(alpha=walk_alpha, walk_length=cfg.walk_length,
                         walks_per_start=cfg.walks_per_start, window=cfg.window,
                         seed=cfg.seed)
    wc = wk.generate_walks(graph, wcfg, workers=cfg.workers)
    pairs = wk.window_pairs(wc, window=cfg.window, drop_authors=drop_authors)
    gcfg = gnn.GnnConfig(
        layers=len(cfg.gnn_sample_sizes), sample_sizes=cfg.gnn_sample_sizes,
        dims=cfg.gnn_dims, batch_size=cfg.gnn_batch_size,
        negatives=cfg.gnn_negatives, lr=cfg.gnn_lr, seed=cfg.seed,
        setting=cfg.gnn_setting, include_self=cfg.gnn_include_self,
        steps=cfg.gnn_steps,
    )
    params, z, trace, node_ids = gnn.train_autoencoder(adj, pairs, gcfg)
    h = _echo_config(cfg, "gnn-train")
    labels = [graph.labels[v] for v in node_ids]
    gnn.save_checkpoint(params, gcfg, labels,
                        os.path.join(cfg.outdir, "gnn.checkpoint.json"))
    table = emb.EmbeddingTable(
        vocabulary={lab: i for i, lab in enumerate(labels)},
        hidden=z, output=np.zeros_like(z), flags=("output_missing",),
    )
    emb.save_embedding(table, os.path.join(cfg.outdir, "gnn.embedding.txt"))
    _write_json(os.path.join(cfg.outdir, "gnn.meta.json"),
                {"config_hash": h, "seed": cfg.seed, "nodes": len(labels),
                 "loss_first": trace[0], "loss_last": trace[-1],
                 "steps": len(trace)})


# --- argument parsing -------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--outdir", default=None)


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", default=None, help="JSON Lines corpus file")
    p.add_argument("--keywords", default=None, help="keyword file, one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperdiscovery",
        description="Hypergraph random-walk discovery prediction pipeline",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="validate a corpus and write stats")
    _add_common(p)
    _add_corpus_args(p)

    p = sub.add_parser("graph", help="build the pre-t hypergraph snapshot")
    _add_common(p)
    _add_corpus_args(p)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--canonical-ids", dest="canonical_ids", action="store_true",
                   default=None)

    p = sub.add_parser("transition", help="export the transition matrix")
    _add_common(p)
    p.add_argument("--graph", default=None)
    p.add_argument("--exclude-self", dest="exclude_self", action="store_true",
                   default=None)
    p.add_argument("--steps", type=int, default=None, choices=(2, 3),
                   help="also score materials by author-mediated transitions")

    p = sub.add_parser("walk", help="generate biased random walks")
    _add_common(p)
    p.add_argument("--graph", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--walk-length", dest="walk_length", type=int, default=None)
    p.add_argument("--walks-per-start", dest="walks_per_start", type=int,
                   default=None)

    p = sub.add_parser("embed", help="train the skipgram embedding")
    _add_common(p)
    p.add_argument("--walks", default=None, help="walk corpus file")
    p.add_argument("--sentences-from", dest="sentences_from", default=None,
                   help="corpus file whose token lists join the stream")
    p.add_argument("--keywords", default=None)
    p.add_argument("--walks-weight", dest="walks_weight", type=int, default=1)
    p.add_argument("--sentences-weight", dest="sentences_weight", type=int,
                   default=1)
    p.add_argument("--drop-authors", dest="drop_authors", action="store_true")
    p.add_argument("--graph", default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--sg-dim", dest="sg_dim", type=int, default=None)
    p.add_argument("--sg-epochs", dest="sg_epochs", type=int, default=None)
    p.add_argument("--sg-lr", dest="sg_lr", type=float, default=None)
    p.add_argument("--sg-negatives", dest="sg_negatives", type=int, default=None)
    p.add_argument("--property-token", dest="property_token", default=None,
                   help="emit plausibility.csv against this token")
    p.add_argument("--plausibility-mode", dest="plausibility_mode",
                   default="output-hidden",
                   choices=("output-hidden", "hidden-hidden"))
    p.add_argument("--load-hidden", dest="load_hidden", default=None,
                   help="score from an existing embedding instead of training")
    p.add_argument("--load-output", dest="load_output", default=None)

    p = sub.add_parser("sppmi", help="build the (deepwalk-modified) SPPMI matrix")
    _add_common(p)
    p.add_argument("--sentences-from", dest="sentences_from", default=None)
    p.add_argument("--keywords", default=None)
    p.add_argument("--walks", default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--shift-k", dest="shift_k", type=float, default=None)
    p.add_argument("--alpha-mix", dest="alpha_mix", type=float, default=None)

    p = sub.add_parser("sd", help="social-density scores for unstudied candidates")
    _add_common(p)
    _add_corpus_args(p)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--gamma", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sd-method", dest="sd_method", default=None,
                   choices=("sum", "rand", "class"))
    p.add_argument("--min-mentions", dest="min_mentions", type=int, default=None)
    p.add_argument("--label-window", dest="label_window", type=int, default=None)

    p = sub.add_parser("spd", help="shortest-path distances from the property node")
    _add_common(p)
    p.add_argument("--graph", default=None)
    p.add_argument("--spd-projection", dest="spd_projection", default=None,
                   choices=("full", "concepts"))

    p = sub.add_parser("fuse", help="combine two score tables")
    _add_common(p)
    p.add_argument("--s1", default=None)
    p.add_argument("--s2", default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--method", default=None, choices=sc.FUSION_METHODS)

    p = sub.add_parser("predict", help="rank unstudied candidates")
    _add_common(p)
    _add_corpus_args(p)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--method", default=None, choices=sc.FUSION_METHODS)
    p.add_argument("--s1", default=None)
    p.add_argument("--s2", default=None)
    p.add_argument("--min-mentions", dest="min_mentions", type=int, default=None)

    p = sub.add_parser("evaluate", help="fill hit rates into a prediction report")
    _add_common(p)
    _add_corpus_args(p)
    p.add_argument("--report", default=None)
    p.add_argument("--normalize-by-len", dest="normalize_by_len",
                   action="store_true")

    p = sub.add_parser("sweep-beta", help="beta-sweep self-evaluation table")
    _add_common(p)
    p.add_argument("--s1", default=None)
    p.add_argument("--s2", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--beta-grid", dest="beta_grid", default=None,
                   help="comma-separated beta values")
    p.add_argument("--methods", default=None,
                   help="comma-separated fusion methods")

    p = sub.add_parser("gnn-train", help="train the graph autoencoder")
    _add_common(p)
    p.add_argument("--graph", default=None)
    p.add_argument("--gnn-setting", dest="gnn_setting", default=None,
                   choices=("full", "author_less"))
    p.add_argument("--gnn-dims", dest="gnn_dims", default=None,
                   help="comma-separated layer sizes, input first")
    p.add_argument("--gnn-sample-sizes", dest="gnn_sample_sizes", default=None)
    p.add_argument("--gnn-batch-size", dest="gnn_batch_size", type=int,
                   default=None)
    p.add_argument("--gnn-negatives", dest="gnn_negatives", type=int, default=None)
    p.add_argument("--gnn-lr", dest="gnn_lr", type=float, default=None)
    p.add_argument("--gnn-steps", dest="gnn_steps", type=int, default=None)
    p.add_argument("--walk-length", dest="walk_length", type=int, default=None)
    p.add_argument("--walks-per-start", dest="walks_per_start", type=int,
                   default=None)
    p.add_argument("--window", type=int, default=None)

    return parser


_HANDLERS = {
    "ingest": lambda cfg, args: cmd_ingest(cfg),
    "graph": lambda cfg, args: cmd_graph(cfg),
    "transition": cmd_transition,
    "walk": cmd_walk,
    "embed": cmd_embed,
    "sppmi": cmd_sppmi,
    "sd": lambda cfg, args: cmd_sd(cfg),
    "spd": cmd_spd,
    "fuse": cmd_fuse,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep-beta": cmd_sweep_beta,
    "gnn-train": cmd_gnn_train,
}


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = effective_config(args)
        _HANDLERS[args.command](cfg, args)
    except (ValidationError, FormatError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary: runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
