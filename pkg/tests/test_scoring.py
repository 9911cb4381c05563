import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperdiscovery import hypergraph as hg
from hyperdiscovery import scoring as sc
from hyperdiscovery.errors import DomainError, ValidationError
from hyperdiscovery.hypergraph import NodeKind


def oracle_quantile(p: float) -> float:
    """High-precision reference via mpmath's inverse error function."""
    return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))


def test_quantile_against_high_precision_oracle():
    rng = np.random.default_rng(0)
    ps = np.concatenate(
        [rng.uniform(1e-12, 1.0 - 1e-12, size=9_900),
         rng.uniform(1e-12, 1e-3, size=50),
         1.0 - rng.uniform(1e-12, 1e-3, size=50)]
    )
    worst = max(abs(sc.normal_quantile(float(p)) - oracle_quantile(float(p))) for p in ps)
    assert worst < 1e-9


def test_quantile_domain():
    with pytest.raises(DomainError):
        sc.normal_quantile(0.0)
    with pytest.raises(DomainError):
        sc.normal_quantile(1.0)


def table(vals, provenance="sp_d", **kw):
    return sc.ScoreTable(values=dict(vals), provenance=provenance, **kw)


def test_score_table_rejects_nan():
    with pytest.raises(ValidationError):
        table({"a": float("nan")})


def test_score_table_inf_only_for_spd():
    table({"a": float("inf")})  # fine for sp_d
    with pytest.raises(ValidationError):
        table({"a": float("inf")}, provenance="plausibility")


def test_bfs_g1(g1):
    adj = hg.projected_adjacency(g1, list(NodeKind))
    t = sc.shortest_path_distances(g1, adj)
    assert t.values["m2"] == 1.0  # shares hyperedge e3 with the property node
    assert t.values["m1"] == 1.0


def test_bfs_two_hops_and_unreachable():
    # property-a-m1 edge, m1-m2 edge, isolated m3
    h = hg.from_edge_sets(
        [2, 0, 1, 1, 1],
        ["<PROPERTY>", "a", "m1", "m2", "m3"],
        [[0, 1, 2], [2, 3]],
    )
    adj = hg.projected_adjacency(h, list(NodeKind))
    t = sc.shortest_path_distances(h, adj)
    assert t.values["m1"] == 1.0
    assert t.values["m2"] == 2.0
    assert t.values["m3"] == math.inf


def test_bfs_missing_source():
    h = hg.from_edge_sets([1, 1], ["m1", "m2"], [[0, 1]])
    adj = hg.projected_adjacency(h, list(NodeKind))
    with pytest.raises(LookupError):
        sc.shortest_path_distances(h, adj)  # no property node


def test_sentinel_rule():
    t = sc.apply_sentinel(table({"a": 2.0, "b": math.inf}))
    assert t.values == {"a": 2.0, "b": 3.0}
    assert t.metadata["sentinel"] == 3.0
    assert t.candidate_flags["b"] == ("sentinel",)


def test_sentinel_identity_without_inf():
    t0 = table({"a": 1.0, "b": 5.0})
    assert sc.apply_sentinel(t0) is t0


def test_sentinel_all_infinite():
    t = sc.apply_sentinel(table({"a": math.inf}))
    assert t.values == {"a": 1.0}
    assert "all_infinite" in t.flags


def test_vdw_three_distinct_values():
    t = sc.van_der_waerden(table({"a": 10.0, "b": 20.0, "c": 30.0}))
    got = [t.values["a"], t.values["b"], t.values["c"]]
    want = [oracle_quantile(0.25), 0.0, oracle_quantile(0.75)]
    np.testing.assert_allclose(got, want, atol=1e-5)
    np.testing.assert_allclose(got, [-0.67449, 0.0, 0.67449], atol=1e-5)


def test_vdw_middle_rank_exactly_zero():
    t = sc.van_der_waerden(table({"a": 1.0, "b": 2.0, "c": 9.0, "d": 11.0, "e": 30.0}))
    assert t.values["c"] == 0.0


@pytest.mark.parametrize("n", [2, 3, 10, 37, 100])
def test_vdw_antisymmetric_over_ranks(n):
    vals = {f"c{i:03d}": float(i) for i in range(n)}
    t = sc.van_der_waerden(table(vals))
    ordered = [t.values[f"c{i:03d}"] for i in range(n)]
    for r in range(n):
        assert ordered[r] == pytest.approx(-ordered[n - 1 - r], abs=1e-9)


def test_vdw_ties_average_rank():
    t = sc.van_der_waerden(table({"a": 5.0, "b": 5.0}))
    assert t.values["a"] == t.values["b"] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    vals=st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=2, max_size=40, unique=True,
    )
)
def test_vdw_strictly_monotone(vals):
    t = sc.van_der_waerden(table({f"c{i}": v for i, v in enumerate(vals)}))
    order = sorted(range(len(vals)), key=lambda i: vals[i])
    transformed = [t.values[f"c{order[i]}"] for i in range(len(vals))]
    assert all(a < b for a, b in zip(transformed, transformed[1:]))


def test_combine_geometric_beta_one():
    s1 = table({"a": 4.0, "b": 9.0}, provenance="sp_d")
    s2 = table({"a": 1.0, "b": 7.0}, provenance="plausibility")
    fused = sc.combine_scores(s1, s2, beta=1.0, method="geometric")
    assert fused.values["a"] == pytest.approx(2.0)
    assert fused.values["b"] == pytest.approx(3.0)


def test_combine_harmonic_equal_inputs_factor_two():
    s = {"a": 3.0, "b": 0.5}
    s1 = table(s, provenance="sp_d")
    s2 = table(s, provenance="plausibility")
    for beta in (0.0, 0.3, 1.0):
        fused = sc.combine_scores(s1, s2, beta, "harmonic")
        for c, v in s.items():
            assert fused.values[c] == pytest.approx(2.0 * v)


def test_combine_vdw_z_symmetric_at_half():
    rng = np.random.default_rng(1)
    names = [f"c{i}" for i in range(20)]
    s1 = table(dict(zip(names, rng.uniform(1, 9, 20))), provenance="sp_d")
    s2 = table(dict(zip(names, rng.uniform(1, 9, 20))), provenance="plausibility")
    f12 = sc.combine_scores(s1, s2, 0.5, "vdw_z")
    f21 = sc.combine_scores(s2, s1, 0.5, "vdw_z")
    for c in names:
        assert f12.values[c] == pytest.approx(f21.values[c], abs=1e-12)


def test_combine_rejects_bad_beta_and_nonpositive():
    s1 = table({"a": 1.0}, provenance="sp_d")
    s2 = table({"a": 2.0}, provenance="plausibility")
    with pytest.raises(DomainError):
        sc.combine_scores(s1, s2, 1.5, "vdw_z")
    bad = table({"a": -1.0}, provenance="plausibility")
    with pytest.raises(DomainError, match="a"):
        sc.combine_scores(s1, bad, 0.5, "geometric")
    with pytest.raises(DomainError):
        sc.combine_scores(s1, bad, 0.5, "harmonic")


def test_combine_mismatched_candidates():
    s1 = table({"a": 1.0, "b": 2.0}, provenance="sp_d")
    s2 = table({"a": 2.0}, provenance="plausibility")
    with pytest.raises(ValidationError):
        sc.combine_scores(s1, s2, 0.5, "vdw_z")


def test_linear_lambda_scaling_recorded():
    s1 = table({"a": 2.0, "b": 4.0}, provenance="sp_d")
    s2 = table({"a": 1.0, "b": 2.0}, provenance="sd")
    fused = sc.combine_scores(s1, s2, 0.5, "linear_lambda")
    lam = fused.metadata["lambda"]
    assert lam == pytest.approx(2.0)  # mean(s1)=3, mean positive s2=1.5
    assert fused.values["a"] == pytest.approx(0.5 * 2.0 + lam * 0.5 * 1.0)


def test_linear_lambda_no_positive_s2():
    s1 = table({"a": 2.0}, provenance="sp_d")
    s2 = table({"a": 0.0}, provenance="sd")
    fused = sc.combine_scores(s1, s2, 0.5, "linear_lambda")
    assert "lambda_default" in fused.flags


def rank_key(t, c):
    return t.values[c]


def tie_grouped(order, t):
    groups, current, last = [], [], None
    for c in order:
        v = t.values[c]
        if last is None or v == last:
            current.append(c)
        else:
            groups.append(set(current))
            current = [c]
        last = v
    groups.append(set(current))
    return groups


@pytest.mark.parametrize("method", sc.FUSION_METHODS)
def test_fusion_extremes_match_pure_rankings(method):
    rng = np.random.default_rng(7)
    names = [f"c{i:02d}" for i in range(30)]
    s1 = table(dict(zip(names, rng.uniform(0.1, 10, 30))), provenance="sp_d")
    s2 = table(dict(zip(names, rng.uniform(0.1, 10, 30))), provenance="plausibility")
    k = 10
    top1 = sc.rank_candidates(sc.combine_scores(s1, s2, 1.0, method), k)
    assert top1 == sc.rank_candidates(s1, k)
    top0 = sc.rank_candidates(sc.combine_scores(s1, s2, 0.0, method), k)
    assert top0 == sc.rank_candidates(s2, k)


def test_beta_zero_vdw_matches_pure_s2_argsort():
    rng = np.random.default_rng(9)
    names = [f"c{i:02d}" for i in range(25)]
    s1 = table(dict(zip(names, rng.uniform(0, 5, 25))), provenance="sp_d")
    s2 = table(dict(zip(names, rng.uniform(0, 5, 25))), provenance="plausibility")
    fused = sc.combine_scores(s1, s2, 0.0, "vdw_z")
    order_fused = np.argsort([-fused.values[c] for c in names], kind="stable")
    order_pure = np.argsort([-s2.values[c] for c in names], kind="stable")
    assert list(order_fused) == list(order_pure)


def test_vdw_z_invariant_under_positive_affine_rescale():
    rng = np.random.default_rng(11)
    names = [f"c{i}" for i in range(15)]
    a = rng.uniform(1, 9, 15)
    b = rng.uniform(1, 9, 15)
    s1 = table(dict(zip(names, a)), provenance="sp_d")
    s2 = table(dict(zip(names, b)), provenance="plausibility")
    s1r = table(dict(zip(names, 3.0 * a + 7.0)), provenance="sp_d")
    s2r = table(dict(zip(names, 0.2 * b + 1.0)), provenance="plausibility")
    f = sc.combine_scores(s1, s2, 0.3, "vdw_z")
    fr = sc.combine_scores(s1r, s2r, 0.3, "vdw_z")
    for c in names:
        assert f.values[c] == pytest.approx(fr.values[c], abs=1e-12)


@pytest.mark.parametrize("method", ["geometric", "harmonic"])
def test_mean_fusions_rank_invariant_under_common_scale(method):
    rng = np.random.default_rng(13)
    names = [f"c{i}" for i in range(20)]
    a = rng.uniform(0.5, 9, 20)
    b = rng.uniform(0.5, 9, 20)
    f1 = sc.combine_scores(
        table(dict(zip(names, a)), provenance="sp_d"),
        table(dict(zip(names, b)), provenance="plausibility"),
        0.4, method,
    )
    f2 = sc.combine_scores(
        table(dict(zip(names, 5.0 * a)), provenance="sp_d"),
        table(dict(zip(names, 5.0 * b)), provenance="plausibility"),
        0.4, method,
    )
    assert sc.rank_candidates(f1, 20) == sc.rank_candidates(f2, 20)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000),
       beta=st.floats(min_value=0.0, max_value=1.0))
def test_fusion_nan_free(seed, beta):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 20))
    names = [f"c{i}" for i in range(n)]
    s1 = table(dict(zip(names, rng.uniform(0.01, 100, n))), provenance="sp_d")
    s2 = table(dict(zip(names, rng.uniform(0.01, 100, n))), provenance="plausibility")
    for method in sc.FUSION_METHODS:
        fused = sc.combine_scores(s1, s2, beta, method)
        assert all(math.isfinite(v) for v in fused.values.values())


def test_rank_ties_lexicographic():
    t = table({"zeta": 1.0, "alpha": 1.0, "mid": 1.0}, provenance="sd")
    assert sc.rank_candidates(t, 3) == ["alpha", "mid", "zeta"]


def test_rank_k_larger_than_table():
    t = table({"b": 2.0, "a": 1.0}, provenance="sd")
    assert sc.rank_candidates(t, 10) == ["b", "a"]


def test_rank_min_first():
    t = table({"a": 3.0, "b": 1.0}, provenance="sd")
    assert sc.rank_candidates(t, 2, "min_first") == ["b", "a"]


def test_score_csv_round_trip(tmp_path):
    t = table({"a": 1.5, "b": math.inf}, provenance="sp_d",
              candidate_flags={"b": ("sentinel",)})
    path = tmp_path / "scores.csv"
    sc.save_score_csv(t, path)
    loaded = sc.load_score_csv(path)
    assert loaded.values == t.values
    assert loaded.provenance == "sp_d"
    assert loaded.candidate_flags["b"] == ("sentinel",)
