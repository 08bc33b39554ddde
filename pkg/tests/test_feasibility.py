"""
Test per il bilanciamento dei rate e il punto iniziale
======================================================
"""

import numpy as np
import pytest

from hetnet_energy.controllers.cutting_plane import CutPool, master_solve
from hetnet_energy.controllers.feasibility import (
    is_feasible,
    rate_balance,
    rate_upper_bound,
    strict_start,
)
from hetnet_energy.controllers.lp_core import solve_direct_weighted_lp
from hetnet_energy.models.allocation import Allocation, BalanceResult


class TestRateBalance:
    """Test per rate_balance."""

    def test_single_link(self):
        """Test un collegamento: R_sum = rate, quota piena."""
        balance = rate_balance(np.array([[[10.0]]]), [1.0])

        assert balance.R_sum == pytest.approx(10.0)
        assert balance.allocation.alpha(0, 0, 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("engine", ["direct", "cutplane"])
    def test_micro_value(self, micro_rates, micro_demands, engine):
        """Test R_sum = 35/3 sulla micro-istanza con entrambi i motori."""
        balance = rate_balance(micro_rates, micro_demands, engine=engine)

        assert balance.R_sum == pytest.approx(35.0 / 3.0, rel=1e-6)
        np.testing.assert_allclose(balance.beta, [0.5, 0.5])
        assert np.all(balance.achieved >= balance.beta * balance.R_sum - 1e-8 * 35.0)

    def test_scale_invariance(self, micro_rates, micro_demands):
        """Test R_sum invariante alla scala uniforme delle domande."""
        a = rate_balance(micro_rates, micro_demands)
        b = rate_balance(micro_rates, 1000.0 * micro_demands)

        assert a.R_sum == pytest.approx(b.R_sum, rel=1e-9)

    def test_all_zero_rates(self):
        """Test rate tutti nulli: R_sum = 0."""
        balance = rate_balance(np.zeros((2, 2, 3)), [1.0, 1.0])

        assert balance.R_sum == 0.0

    def test_zero_demand(self, micro_rates):
        """Test domanda nulla: banalmente ammissibile."""
        balance = rate_balance(micro_rates, [0.0, 0.0])

        assert is_feasible(balance, [0.0, 0.0])

    def test_unknown_engine(self, micro_rates, micro_demands):
        """Test motore sconosciuto."""
        with pytest.raises(ValueError):
            rate_balance(micro_rates, micro_demands, engine="simplex")

    def test_upper_bound(self):
        """Test limite su R_sum valido anche con più BS che punti di test."""
        r = np.zeros((1, 2, 1))
        r[0, :, 0] = [3.0, 4.0]

        assert rate_upper_bound(r) == pytest.approx(7.0)
        assert rate_balance(r, [1.0]).R_sum == pytest.approx(7.0)


class TestIsFeasible:
    """Test per is_feasible."""

    def _balance(self, R_sum):
        return BalanceResult(R_sum, Allocation.zero(2, 1, 1), np.array([0.5, 0.5]), np.zeros(2))

    def test_boundary(self):
        """Test R_sum = sum(d) ammissibile."""
        assert is_feasible(self._balance(8.0), [4.0, 4.0])

    def test_zero_capacity(self):
        """Test R_sum = 0 con domanda positiva."""
        assert not is_feasible(self._balance(0.0), [4.0, 4.0])

    def test_micro_threshold(self, micro_rates):
        """Test soglia della micro-istanza: 35/3."""
        assert is_feasible(rate_balance(micro_rates, [5.8, 5.8]), [5.8, 5.8])
        assert not is_feasible(rate_balance(micro_rates, [6.0, 6.0]), [6.0, 6.0])

    def test_matches_direct_lp(self, instance_factory):
        """Test equivalenza con l'ammissibilità del problema pesato diretto."""
        for seed in range(10):
            _, _, rates, d = instance_factory(seed)
            r_max = float(rates.rates.max())
            balance = rate_balance(rates, d)
            for factor in (0.9, 1.1):
                trial = factor * balance.R_sum * balance.beta
                status = solve_direct_weighted_lp(rates.rates / r_max, np.ones(rates.B), trial / r_max).status

                assert is_feasible(rate_balance(rates, trial), trial) == (status == "optimal")


class TestStrictStart:
    """Test per strict_start."""

    def test_micro_margin(self, micro_rates, micro_demands):
        """Test margine minimo e taglio limitante."""
        balance = rate_balance(micro_rates, micro_demands)
        start = strict_start(balance, micro_demands, shrink=0.5, rates=micro_rates)
        rho_r = balance.R_sum / 8.0

        assert start.strict
        assert start.slack >= (rho_r - 1.0) * 4.0 * 0.5 - 1e-9
        assert start.cut.is_bounding
        assert start.allocation.validate(micro_rates, micro_demands) == []

    def test_cut_bounds_master(self, micro_rates, micro_demands):
        """Test il solo taglio iniziale rende finito il master."""
        start = strict_start(rate_balance(micro_rates, micro_demands), micro_demands)
        pool = CutPool(2, np.inf)
        pool.add(start.cut)

        assert np.isfinite(master_solve(pool).z)

    def test_double_capacity(self):
        """Test R_sum = 2 sum(d): margine pieno prima dello shrink."""
        balance = rate_balance(np.array([[[10.0]]]), [5.0])
        start = strict_start(balance, [5.0], shrink=0.5)

        assert start.scale == pytest.approx(0.75)
        assert start.slack == pytest.approx(2.5)

    def test_equality_not_strict(self):
        """Test R_sum = sum(d): nessun taglio."""
        balance = rate_balance(np.array([[[10.0]]]), [10.0])
        start = strict_start(balance, [10.0])

        assert not start.strict
        assert start.cut is None

    def test_invalid_shrink(self, micro_rates, micro_demands):
        """Test shrink fuori da (0, 1)."""
        with pytest.raises(ValueError):
            strict_start(rate_balance(micro_rates, micro_demands), micro_demands, shrink=1.0)
