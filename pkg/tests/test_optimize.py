import itertools

import pytest

from riskeygen.errors import ConfigError, DomainError
from riskeygen.figures import at_effective_snr
from riskeygen.keygen import ProtocolParams
from riskeygen.optimize import (
    DEFAULT_Q_CANDIDATES,
    OptimizationResult,
    feasible_t_keys,
    info_rate_at,
    key_rate_at,
    loglog_term,
    optimize_all,
    q_search,
    secrecy_objective,
    tk_closed_form,
    tk_numeric,
    tk_objective,
    ts_optimal,
)
from riskeygen.scene import ScenarioConfig


@pytest.fixture(scope="module")
def table():
    return ScenarioConfig()


@pytest.fixture(scope="module")
def table_result(table):
    return optimize_all(table)


def test_feasible_grid():
    assert feasible_t_keys(10, 2) == [2, 4, 6, 8, 10]
    assert feasible_t_keys(100, 20) == [20, 40, 60, 80, 100]
    assert feasible_t_keys(100, 10, min_intervals=2) == list(range(20, 101, 10))
    assert feasible_t_keys(10, 20) == []


class TestClosedForm:
    def test_examples(self):
        assert tk_closed_form(1000, 3.0, 3.0) == 500
        assert tk_closed_form(1000, 9.0, 3.0) == 250
        assert tk_closed_form(1000, 0.0, 3.0) == 1000

    def test_rounds_to_grid(self):
        tk = tk_closed_form(1000, 1.0, 2.0, t_switch=10)
        assert tk % 10 == 0 and tk == 670

    def test_degenerate(self):
        with pytest.raises(DomainError):
            tk_closed_form(1000, 0.0, 0.0)


class TestNumeric:
    def test_without_loglog_matches_line_intersection(self):
        # the scan balances T_k R_k / (2T) against (T - T_k) R~ / T, whose
        # crossing is the closed form evaluated at R_k / 2
        for rk, rt in [(2.0, 12.0), (5.0, 5.0), (0.3, 9.0), (3.2, 13.0)]:
            for ts in (2, 4, 10):
                assert tk_numeric(1000, ts, rk, rt, loglog=False) == tk_closed_form(1000, rk / 2, rt, ts)

    def test_local_optimality(self):
        for rk, rt, ts in [(3.2, 13.0, 2), (1.0, 4.0, 4), (6.0, 2.0, 10)]:
            tk = tk_numeric(1000, ts, rk, rt)
            here = tk_objective(tk, 1000, ts, rk, rt)
            for nb in (tk - ts, tk + ts):
                if 2 * ts <= nb <= 1000:
                    assert here <= tk_objective(nb, 1000, ts, rk, rt)

    def test_skips_single_interval(self):
        trace = []
        tk_numeric(100, 10, 1.0, 1.0, trace=trace)
        assert min(c[1] for c, _ in trace) == 20

    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            tk_numeric(10, 20, 1.0, 1.0)

    def test_loglog_domain(self):
        with pytest.raises(DomainError):
            loglog_term(1)

    @pytest.mark.xfail(
        strict=True,
        reason="printed closed form omits the 1/2 on the key term; rates differ by about 11% on the table scenario",
    )
    def test_table_closed_vs_numeric_within_5pct(self, table, table_result):
        r = table_result
        a = secrecy_objective(table, 1000, r.t_key_star, 2, r.q_star)
        b = secrecy_objective(table, 1000, r.t_key_star_closed, 2, r.q_star)
        assert abs(a - b) <= 0.05 * a


class TestSwitching:
    def test_ts_optimal(self):
        assert ts_optimal() == 2
        assert ts_optimal(2) == 2
        assert ts_optimal(5) == 6
        assert ts_optimal(8) == 8

    def test_ts2_maximizes_secrecy(self, table):
        vals = {}
        for ts in (2, 4, 10, 20, 40):
            p = ProtocolParams(t_key=200, t_switch=ts)
            vals[ts] = secrecy_objective(table, 1000, p.t_key, ts, 4)
        assert max(vals, key=vals.get) == 2
        ordered = [vals[t] for t in (2, 4, 10, 20, 40)]
        assert all(a >= b for a, b in zip(ordered, ordered[1:]))


class TestQSearch:
    def test_single_candidate(self, table):
        assert q_search(table, ProtocolParams(), [8]) == 8

    @pytest.mark.parametrize("snr_db", [-10.0, -3.0, 0.0])
    def test_low_snr_picks_two(self, table, snr_db):
        p = ProtocolParams()
        assert q_search(at_effective_snr(table, p, snr_db), p) == 2

    def test_nondecreasing_in_power(self, table):
        qs = [optimize_all(table.replace(tx_power_dbm=pw)).q_star for pw in (10, 15, 20, 25)]
        assert qs == sorted(qs)

    def test_rejects_bad_candidates(self, table):
        with pytest.raises(ConfigError):
            q_search(table, ProtocolParams(), [3])
        with pytest.raises(ConfigError):
            q_search(table, ProtocolParams(), [])


class TestOptimizeAll:
    def test_invariants(self, table_result):
        r = table_result
        assert r.t_switch_star == 2
        assert r.t_key_star % 2 == 0 and r.t_key_star % r.t_switch_star == 0
        assert r.q_star in DEFAULT_Q_CANDIDATES
        assert r.secrecy_rate >= 0
        assert r.search_trace and r.search_trace[-1][0][0] == "final"

    def test_table_values(self, table_result):
        # frozen regression values for the default scenario
        r = table_result
        assert (r.t_key_star, r.t_key_star_closed, r.q_star) == (906, 804, 32)
        assert r.secrecy_rate == pytest.approx(1.6282994575458702, rel=1e-12)

    def test_beats_spot_check_grid(self, table, table_result):
        grid = itertools.product((200, 600, 900), (2, 4, 10), (4, 16, 32))
        for tk, ts, q in grid:
            if tk % ts:
                continue
            assert table_result.secrecy_rate >= secrecy_objective(table, 1000, tk, ts, q) - 1e-12

    def test_within_10pct_of_exhaustive(self, table, table_result):
        best = max(
            secrecy_objective(table, 1000, tk, ts, q)
            for ts in (2, 4, 10, 20)
            for tk in feasible_t_keys(1000, ts, 2)
            for q in DEFAULT_Q_CANDIDATES
        )
        assert table_result.secrecy_rate >= 0.9 * best

    def test_reproducible(self, table, table_result):
        again = optimize_all(table)
        assert again == table_result

    def test_hardware_floor(self, table):
        r = optimize_all(table, t_switch_min=10)
        assert r.t_switch_star == 10 and r.t_key_star % 10 == 0

    def test_check_rejects_infeasible(self):
        with pytest.raises(DomainError):
            OptimizationResult(301, 300, 2, 4, 1.0).check(1000)
        with pytest.raises(DomainError):
            OptimizationResult(300, 300, 2, 6, 1.0).check(1000)

    def test_rate_helpers(self, table):
        assert key_rate_at(table, 2, 4) > key_rate_at(table, 4, 4)
        assert info_rate_at(table, 100) > info_rate_at(table, 10)
