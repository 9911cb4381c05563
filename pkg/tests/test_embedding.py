import math

import numpy as np
import pytest

from hyperdiscovery import embedding as emb
from hyperdiscovery import walks as wk
from hyperdiscovery.errors import FormatError, ValidationError


def planted_pairs(n_bg=30, bg_reps=20, planted_reps=10):
    """u and v co-occur in every planted block and share six dedicated
    context tokens; each background token only ever sees its own context, so
    background pairs are structurally unrelated."""
    pairs = []
    for i in range(n_bg):
        pairs += [(f"m{i}", f"c{i}"), (f"c{i}", f"m{i}")] * bg_reps
    ctx_pool = [f"x{i}" for i in range(6)]
    for _ in range(planted_reps):
        for x in ctx_pool:
            pairs += [("u", x), (x, "u"), ("v", x), (x, "v")]
        pairs += [("u", "v"), ("v", "u")]
    counts = {}
    for a, b in pairs:
        counts[a] = counts.get(a, 0) + 1
        counts[b] = counts.get(b, 0) + 1
    return pairs, counts, [f"m{i}" for i in range(n_bg)]


def test_planted_cooccurrence_beats_random_pairs():
    pairs, counts, background = planted_pairs()
    sampler = wk.build_negative_sampler(counts)
    cfg = emb.SkipgramConfig(dim=12, epochs=40, lr=0.05, negatives=5, seed=1)
    table, _ = emb.train_skipgram(pairs, sampler, cfg)
    planted = emb.cosine(table.hidden[table.index("u")], table.hidden[table.index("v")])
    others = [
        emb.cosine(table.hidden[table.index(a)], table.hidden[table.index(b)])
        for i, a in enumerate(background)
        for b in background[i + 1 :]
    ]
    assert planted > np.percentile(others, 95)


def test_zero_epochs_returns_initialization():
    pairs = [("a", "b"), ("b", "a")]
    sampler = wk.build_negative_sampler({"a": 1, "b": 1})
    cfg = emb.SkipgramConfig(dim=8, epochs=0, seed=3)
    t1, trace1 = emb.train_skipgram(pairs, sampler, cfg)
    t2, _ = emb.train_skipgram(pairs, sampler, cfg)
    assert np.array_equal(t1.hidden, t2.hidden)
    assert np.all(t1.output == 0.0)
    assert np.all(np.abs(t1.hidden) <= 0.5 / cfg.dim)
    assert len(trace1) == 1


def test_heldout_loss_decreases():
    pairs, counts, _ = planted_pairs(n_bg=15, bg_reps=10, planted_reps=5)
    sampler = wk.build_negative_sampler(counts)
    cfg = emb.SkipgramConfig(dim=12, epochs=8, lr=0.05, negatives=5, seed=5)
    _, trace = emb.train_skipgram(pairs, sampler, cfg)
    assert len(trace) == cfg.epochs + 1
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert trace[-1] < trace[0]


def finite_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = f()
        flat[i] = orig - h
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * h)
    return g


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    V, D = 7, 5
    hidden = rng.normal(scale=0.5, size=(V, D))
    output = rng.normal(scale=0.5, size=(V, D))
    pairs = [(0, 1), (2, 3), (0, 4)]
    negs = [[5, 6], [1, 5], [2, 6]]

    loss, g_h, g_o = emb.skipgram_loss_and_grad(hidden, output, pairs, negs)

    fd_h = finite_difference(
        lambda: emb.skipgram_loss_and_grad(hidden, output, pairs, negs)[0], hidden
    )
    fd_o = finite_difference(
        lambda: emb.skipgram_loss_and_grad(hidden, output, pairs, negs)[0], output
    )
    assert np.linalg.norm(fd_h - g_h) / np.linalg.norm(g_h) < 1e-4
    assert np.linalg.norm(fd_o - g_o) / np.linalg.norm(g_o) < 1e-4


def test_plausibility_modes():
    vocab = {"prop": 0, "ent": 1, "other": 2}
    hidden = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    output = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    table = emb.EmbeddingTable(vocabulary=vocab, hidden=hidden, output=output)
    # identical vectors
    assert emb.plausibility_score(table, "prop", "ent", "output-hidden") == pytest.approx(1.0)
    # orthogonal vectors
    assert emb.plausibility_score(table, "prop", "other", "output-hidden") == pytest.approx(0.0)


def test_plausibility_symmetry_properties():
    rng = np.random.default_rng(7)
    vocab = {f"w{i}": i for i in range(5)}
    table = emb.EmbeddingTable(
        vocabulary=vocab,
        hidden=rng.normal(size=(5, 4)),
        output=rng.normal(size=(5, 4)),
    )
    hh_ab = emb.plausibility_score(table, "w0", "w1", "hidden-hidden")
    hh_ba = emb.plausibility_score(table, "w1", "w0", "hidden-hidden")
    assert hh_ab == pytest.approx(hh_ba, abs=1e-12)
    oh_ab = emb.plausibility_score(table, "w0", "w1", "output-hidden")
    oh_ba = emb.plausibility_score(table, "w1", "w0", "output-hidden")
    assert abs(oh_ab - oh_ba) > 1e-6


def test_plausibility_oov():
    table = emb.EmbeddingTable(vocabulary={"a": 0}, hidden=np.ones((1, 2)),
                               output=np.ones((1, 2)))
    with pytest.raises(LookupError):
        emb.plausibility_score(table, "a", "missing")


def test_plausibility_in_unit_interval():
    rng = np.random.default_rng(8)
    vocab = {f"w{i}": i for i in range(6)}
    table = emb.EmbeddingTable(
        vocabulary=vocab,
        hidden=rng.normal(scale=3.0, size=(6, 3)),
        output=rng.normal(scale=3.0, size=(6, 3)),
    )
    for a in vocab:
        for b in vocab:
            for mode in ("output-hidden", "hidden-hidden"):
                assert -1.0 <= emb.plausibility_score(table, a, b, mode) <= 1.0


def test_sppmi_worked_example():
    # assoc = 16*4 / (2*8*4) = 1 -> log 1 = 0 -> entry clipped to zero
    spec = emb.SppmiSpec(
        pair_counts={(0, 1): 4, (0, 0): 4, (1, 0): 4},
        marginals={0: 8, 1: 4},
        vocab_size=16,
        shift_k=2.0,
    )
    mat = emb.build_sppmi(spec)
    assert mat[0, 1] == 0.0


def test_sppmi_zero_counts_zero_entry():
    spec = emb.SppmiSpec(pair_counts={(0, 1): 2}, marginals={0: 2}, vocab_size=4)
    mat = emb.build_sppmi(spec)
    assert mat[2, 3] == 0.0


def test_sppmi_matches_plain_oracle():
    rng = np.random.default_rng(9)
    n = 12
    pairs = [(int(rng.integers(n)), int(rng.integers(n))) for _ in range(300)]
    spec = emb.SppmiSpec.from_pairs(pairs, vocab_size=n, shift_k=3.0)
    mat = emb.build_sppmi(spec).toarray()

    # independent reimplementation from raw pair list
    counts, marg = {}, {}
    for i, j in pairs:
        counts[(i, j)] = counts.get((i, j), 0) + 1
        marg[i] = marg.get(i, 0) + 1
    want = np.zeros((n, n))
    for (i, j), c in counts.items():
        assoc = n * c / (3.0 * marg[i] * marg[j])
        want[i, j] = max(0.0, math.log(assoc))
    np.testing.assert_array_equal(mat, want)


def test_sppmi_negative_mix_clamps():
    spec = emb.SppmiSpec(
        pair_counts={(0, 1): 1},
        marginals={0: 1},
        vocab_size=4,
        dw_pair_counts={(0, 1): 50},
        dw_vocab_size=2,
        alpha_mix=-5.0,
    )
    mat = emb.build_sppmi(spec)
    assert mat[0, 1] == 0.0  # assoc driven negative, clamped at the floor


def test_sppmi_mix_reduces_to_plain_at_zero():
    pairs = [(0, 1), (0, 1), (1, 0)]
    dw = [(0, 1)] * 5
    with_mix = emb.SppmiSpec.from_pairs(pairs, 4, dw_pairs=dw, dw_vocab_size=2,
                                        alpha_mix=0.0)
    plain = emb.SppmiSpec.from_pairs(pairs, 4)
    np.testing.assert_array_equal(
        emb.build_sppmi(with_mix).toarray(), emb.build_sppmi(plain).toarray()
    )


def test_sppmi_invariant_enforced():
    with pytest.raises(ValidationError):
        emb.SppmiSpec(pair_counts={(0, 1): 3}, marginals={0: 2}, vocab_size=4)


def test_embedding_io_round_trip(tmp_path):
    rng = np.random.default_rng(10)
    vocab = {f"tok{i}": i for i in range(5)}
    table = emb.EmbeddingTable(
        vocabulary=vocab,
        hidden=rng.normal(size=(5, 3)),
        output=rng.normal(size=(5, 3)),
    )
    hpath, opath = tmp_path / "h.txt", tmp_path / "o.txt"
    emb.save_embedding(table, hpath, opath)
    loaded = emb.load_embedding(hpath, opath)
    assert loaded.vocabulary == table.vocabulary
    assert np.array_equal(loaded.hidden, table.hidden)
    assert np.array_equal(loaded.output, table.output)


def test_embedding_io_header_mismatch(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("3 2\ntok0 0.0 1.0\n", encoding="utf-8")
    with pytest.raises(FormatError):
        emb.load_embedding(path)


def test_embedding_io_hidden_only_flagged(tmp_path):
    vocab = {"a": 0, "b": 1}
    table = emb.EmbeddingTable(
        vocabulary=vocab, hidden=np.ones((2, 2)), output=np.full((2, 2), 7.0)
    )
    hpath = tmp_path / "h.txt"
    emb.save_embedding(table, hpath)
    loaded = emb.load_embedding(hpath)
    assert "output_missing" in loaded.flags
    assert np.all(loaded.output == 0.0)


def test_save_rejects_whitespace_tokens(tmp_path):
    table = emb.EmbeddingTable(
        vocabulary={"bad token": 0}, hidden=np.ones((1, 2)), output=np.ones((1, 2))
    )
    with pytest.raises(ValidationError):
        emb.save_embedding(table, tmp_path / "h.txt")
