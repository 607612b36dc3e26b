import numpy as np
import pytest

import ghz_checker as ghz
import majorana_algebra as ma
import stabilizer_sim as ss
from majorana_errors import ArgumentError


def test_pair_parity_on_accessible_groups(rng):
    assert ghz.check_pair_parity(ss.init(4).stabilizers())
    assert ghz.check_pair_parity(ghz.random_accessible_state(4, rng).stabilizer_group())
    assert not ghz.check_pair_parity([ma.pair(4, 1, 2), ma.pair(4, 2, 3)])


def test_even_pair_overlap_means_commuting(rng):
    group = ghz.random_accessible_state(3, rng).stabilizer_group() + [ma.pair(6, 1, 2), ma.pair(6, 2, 3)]
    for s in group:
        for t in group:
            assert (ma.overlap(s, t) % 2 == 0) == ma.commutes(s, t)


def test_triple_parity():
    g1, g2, g3 = ma.pair(6, 1, 2), ma.pair(6, 3, 4), ma.pair(6, 5, 6)
    assert ghz.check_triple_parity([g1 * g2, g2 * g3, g1 * g3])
    assert ghz.check_triple_parity(ss.braid(ss.init(3), 2, 5).stabilizer_group())


def test_canonical_ghz_triple_is_odd():
    stabilizers = ghz.ghz_stabilizers(ghz.canonical_encoding())
    assert ma.triple_overlap(*stabilizers[:3]) == 3
    assert not ghz.check_triple_parity(stabilizers[:3])


def test_fourth_stabilizer_is_minus_xxx():
    candidate = ghz.canonical_encoding()
    stabilizers = ghz.ghz_stabilizers(candidate)
    assert stabilizers[3] == -ma.product(candidate.x, candidate.n_modes)


def test_canonical_obstruction():
    report = ghz.ghz_obstruction(ghz.canonical_encoding())
    assert report["anticomm_parity"] == [1, 1, 1]
    assert report["parity_sum"] == 3
    assert report["triple_overlap"] == 3
    assert report["triple_parity_holds"] is False
    assert report["verdict"] == "obstructed"


def test_weight_four_encoding_is_still_obstructed():
    n_modes = 12
    parties = ((1, 2, 3, 4, 5, 6), (7, 8, 9), (10, 11, 12))
    x = (ma.from_modes(n_modes, (1, 2, 3, 4)), ma.pair(n_modes, 7, 9), ma.pair(n_modes, 10, 12))
    z = (ma.pair(n_modes, 1, 5), ma.pair(n_modes, 7, 8), ma.pair(n_modes, 10, 11))
    report = ghz.ghz_obstruction(ghz.EncodingCandidate(parties, x, z))
    assert report["anticomm_parity"][0] == 1
    assert report["verdict"] == "obstructed"


def test_commuting_encoding_is_rejected():
    canonical = ghz.canonical_encoding()
    x = (canonical.z[0],) + canonical.x[1:]
    with pytest.raises(ArgumentError):
        ghz.ghz_obstruction(ghz.EncodingCandidate(canonical.parties, x, canonical.z))


def test_non_local_encoding_is_rejected():
    canonical = ghz.canonical_encoding()
    n_modes = canonical.n_modes
    x = (ma.pair(n_modes, 3, 6),) + canonical.x[1:]
    with pytest.raises(ArgumentError):
        ghz.EncodingCandidate(canonical.parties, x, canonical.z).validate()


def test_larger_ghz_state():
    report = ghz.ghz_obstruction(ghz.canonical_encoding(4))
    assert report["verdict"] == "obstructed"


def test_exhaustive_encoding_scan():
    scan = ghz.exhaustive_encoding_scan(modes_per_party=4, samples=50, seed=2)
    # six weight-2 strings and the party parity; a pair anticommutes with the 4 pairs sharing one mode
    assert scan.per_party == 6 * 4
    assert scan.rejected_pairs == 3 * (7 * 7 - 24)
    assert scan.parity_counts == {"odd": 24, "even": 0}
    assert scan.combinations == scan.per_party ** 3
    assert scan.sampled == 50
    assert scan.symbolic_checked == 3 * 24 + 50
    assert scan.rejected_candidates == 0
    assert scan.even_sum_candidates == 0
    assert scan.verdict == "obstructed"


def test_encoding_scan_counts_unobstructed_candidates(monkeypatch):
    monkeypatch.setattr(ghz, "ghz_obstruction", lambda candidate: {"verdict": "not obstructed"})
    scan = ghz.exhaustive_encoding_scan(modes_per_party=4, samples=5)
    assert scan.even_sum_candidates == scan.symbolic_checked == 3 * 24 + 5
    assert scan.verdict == "counterexample"


def test_encoding_scan_counts_rejected_candidates(monkeypatch):
    def reject(candidate):
        raise ArgumentError("not an encoding")

    monkeypatch.setattr(ghz, "ghz_obstruction", reject)
    scan = ghz.exhaustive_encoding_scan(modes_per_party=4, samples=5)
    assert scan.rejected_candidates == 3 * 24 + 5
    assert scan.symbolic_checked == 0
    assert scan.to_dict()["rejected_candidates"] == scan.rejected_candidates


def test_encoding_scan_rejects_bad_arguments():
    with pytest.raises(ArgumentError):
        ghz.exhaustive_encoding_scan(modes_per_party=7)
    with pytest.raises(ArgumentError):
        ghz.exhaustive_encoding_scan(modes_per_party=4, samples=-1)


def test_noncommuting_pair():
    assert ghz.noncommuting_pair(ss.init(3).stabilizer_group()) is None
    a, b = ma.pair(4, 1, 2), ma.pair(4, 2, 3)
    assert ghz.noncommuting_pair([ma.from_modes(4, (1, 2, 3, 4)), a, b]) == (a, b)
    # odd-weight modes anticommute even with no overlap
    assert ghz.noncommuting_pair([ma.mode(4, 1), ma.mode(4, 2)]) is not None


def test_random_scan_finds_nothing():
    report = ghz.random_accessible_scan(4, 200, seed=7)
    assert report.checked == 200
    assert report.noncommuting == 0
    assert report.verdict == "pass"


def test_single_pair_scan_is_vacuous():
    assert ghz.random_accessible_scan(1, 10, seed=0).verdict == "pass"


def test_injected_violation_is_reported():
    report = ghz.random_accessible_scan(2, 5, seed=0, inject=[ma.pair(4, 1, 2), ma.pair(4, 2, 3)])
    assert report.verdict == "violation"
    assert report.violations[0]["trial"] == 0
    assert report.noncommuting == 5
    assert set(report.to_dict()) == {"checked", "violations", "noncommuting", "verdict"}


def test_scan_size_limit():
    with pytest.raises(ArgumentError):
        ghz.random_accessible_scan(9, 1, seed=0)


def test_random_state_is_accessible():
    state = ghz.random_accessible_state(5, np.random.default_rng(3))
    assert len(state.records) == 5


@pytest.mark.slow
@pytest.mark.parametrize("n_pairs", range(1, 7))
def test_ten_thousand_random_states(n_pairs):
    report = ghz.random_accessible_scan(n_pairs, 10_000, seed=n_pairs)
    assert report.checked == 10_000
    assert report.violations == []
    assert report.noncommuting == 0


@pytest.mark.slow
def test_full_encoding_scan_on_six_modes():
    scan = ghz.exhaustive_encoding_scan(modes_per_party=6, samples=2000, seed=5)
    # 30 supports on six modes, each with 16 odd-overlap partners
    assert scan.per_party == 30 * 16
    assert scan.parity_counts["even"] == 0
    assert scan.rejected_candidates == 0
    assert scan.symbolic_checked == 3 * scan.per_party + 2000
    assert scan.verdict == "obstructed"
