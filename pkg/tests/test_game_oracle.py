"""Brute-force oracle tests: costs, equilibria, dynamics, certificates, serialization."""

import itertools
import math

import pytest

from poalab.basis import Side, from_congestion, from_incentivized, polynomial_basis
from poalab.game_oracle import (ConvergenceError, OracleReport, best_response_dynamics,
                                check_generalized_smoothness, enumerate_equilibria,
                                game_from_json, game_to_json, make_game,
                                poa_bound_from_certificate, potential_value,
                                random_in_class_game, system_value, user_cost)


def two_road_game(c1=(0.0, 1.0, 4.0), f1=(0.0, 1.0, 2.0, 0.0),
                  c2=(0.0, 2.0, 4.0), f2=(0.0, 2.0, 2.0, 0.0)):
    """Two users, two resources, both users pick one resource each."""
    return make_game(2, [(c1, f1), (c2, f2)], [((0,), (1,)), ((0,), (1,))])


class TestValues:
    def test_empty_action_costs_nothing(self):
        game = make_game(1, [((0.0, 1.0), (0.0, 1.0, 0.0))], [((), (0,))])
        assert system_value(game, (0,)) == 0.0
        assert user_cost(game, (0,), 0) == 0.0

    def test_shared_resource_lookup(self):
        game = make_game(2, [((0.0, 1.0, 4.0), (0.0, 1.0, 3.0, 0.0))],
                         [((0,),), ((0,),)])
        assert system_value(game, (0, 0)) == 4.0
        assert user_cost(game, (0, 0), 0) == 3.0
        assert user_cost(game, (0, 0), 1) == 3.0

    def test_congestion_sum_decomposition(self):
        pair = from_congestion((1.0, 3.0), 2)
        game = make_game(2, [(pair.c, pair.f), (pair.c, pair.f)],
                         [((0,), (1,)), ((0,), (1,))])
        for profile in itertools.product((0, 1), repeat=2):
            total = sum(user_cost(game, profile, i) for i in range(2))
            assert total == pytest.approx(system_value(game, profile), rel=1e-12)

    def test_taxed_sum_strictly_exceeds_system_cost(self):
        pair = from_incentivized((1.0, 3.0), (0.5, 0.5), 2)
        game = make_game(2, [(pair.c, pair.f), (pair.c, pair.f)],
                         [((0,), (1,)), ((0,), (1,))])
        for profile in itertools.product((0, 1), repeat=2):
            total = sum(user_cost(game, profile, i) for i in range(2))
            assert total > system_value(game, profile)

    def test_invalid_inputs(self):
        game = two_road_game()
        with pytest.raises(ValueError, match="every user"):
            system_value(game, (0,))
        with pytest.raises(ValueError, match="user index"):
            user_cost(game, (0, 0), 5)


class TestGameValidation:
    def test_bad_resource_index(self):
        with pytest.raises(ValueError, match="invalid resource"):
            make_game(1, [((0.0, 1.0), (0.0, 1.0, 0.0))], [((3,),)])

    def test_no_actions(self):
        with pytest.raises(ValueError, match="no actions"):
            make_game(1, [((0.0, 1.0), (0.0, 1.0, 0.0))], [()])

    def test_nonzero_empty_load_cost(self):
        with pytest.raises(ValueError, match="load 0"):
            make_game(1, [((1.0, 1.0), (0.0, 1.0, 0.0))], [((0,),)])

    def test_table_lengths(self):
        with pytest.raises(ValueError, match="loads 0"):
            make_game(2, [((0.0, 1.0), (0.0, 1.0, 0.0))], [((0,),), ((0,),)])


class TestEnumerateEquilibria:
    def test_single_user_argmin(self):
        game = make_game(1, [((0.0, 1.0), (0.0, 1.0, 0.0)),
                             ((0.0, 2.0), (0.0, 2.0, 0.0))], [((0,), (1,))])
        report = enumerate_equilibria(game)
        assert report.equilibria == ((0,),)
        assert report.poa == pytest.approx(1.0)
        assert report.num_profiles == 2

    def test_braess_like_two_roads(self):
        game = two_road_game()
        report = enumerate_equilibria(game)
        assert report.best_value <= report.worst_eq_value
        assert report.poa >= 1.0
        for profile in report.equilibria:
            for i in range(2):
                cur = user_cost(game, profile, i)
                for alt in range(2):
                    deviated = list(profile)
                    deviated[i] = alt
                    assert cur <= user_cost(game, tuple(deviated), i) + 1e-9

    def test_cap(self):
        game = two_road_game()
        with pytest.raises(ValueError, match="exceeds cap"):
            enumerate_equilibria(game, cap=3)

    def test_undefined_poa_on_zero_optimum(self):
        # a free action makes the optimal cost 0; the ratio is undefined
        game = make_game(1, [((0.0, 1.0), (0.0, 1.0, 0.0))], [((), (0,))])
        report = enumerate_equilibria(game)
        assert report.poa is None

    def test_empty_equilibrium_report_representable(self):
        report = OracleReport((), 1.0, None, None, 4)
        assert report.equilibria == ()
        assert report.poa is None

    def test_equilibrium_set_invariant_under_f_scaling(self):
        base = two_road_game()
        scaled = make_game(2, [((0.0, 1.0, 4.0), (0.0, 2.0, 4.0, 0.0)),
                               ((0.0, 2.0, 4.0), (0.0, 4.0, 4.0, 0.0))],
                           [((0,), (1,)), ((0,), (1,))])
        assert enumerate_equilibria(base).equilibria == enumerate_equilibria(scaled).equilibria


class TestBestResponse:
    @pytest.mark.parametrize("seed", range(12))
    def test_lands_in_equilibrium_set(self, seed):
        pairs = polynomial_basis(1, 4)
        game = random_in_class_game(pairs, 4, seed=seed)
        report = enumerate_equilibria(game)
        profile = best_response_dynamics(game, seed=seed)
        assert profile in report.equilibria

    def test_single_action_games_settle_immediately(self):
        game = make_game(2, [((0.0, 1.0, 2.0), (0.0, 1.0, 1.0, 0.0))],
                         [((0,),), ((0,),)])
        assert best_response_dynamics(game, seed=0) == (0, 0)

    def test_potential_strictly_decreases(self):
        pairs = polynomial_basis(2, 3)
        drops = []
        for seed in range(8):
            game = random_in_class_game(pairs, 3, seed=100 + seed)
            best_response_dynamics(game, seed=seed,
                                   on_move=lambda b, a: drops.append(b - a))
        assert all(d > 0 for d in drops)

    def test_welfare_side_potential_increases(self):
        # two users preferring distinct resources under diminishing returns
        resources = [((0.0, 1.0, 1.2), (0.0, 1.0, 0.2, 0.0))] * 2
        game = make_game(2, resources, [((0,), (1,)), ((0,), (1,))],
                         Side.WELFARE_MAX)
        gains = []
        profile = best_response_dynamics(game, seed=1,
                                         on_move=lambda b, a: gains.append(a - b))
        assert all(g > 0 for g in gains)
        assert profile in enumerate_equilibria(game).equilibria

    def test_start_override(self):
        game = two_road_game()
        report = enumerate_equilibria(game)
        eq = report.equilibria[0]
        assert best_response_dynamics(game, seed=0, start=eq) == eq


def original_smoothness_holds(game, lam, mu, tol=1e-9):
    """Reference check of the classical smoothness inequality, written directly."""
    profiles = list(itertools.product(*[range(len(a)) for a in game.action_sets]))
    for a in profiles:
        for b in profiles:
            deviation = 0.0
            for i in range(game.n_users):
                switched = list(a)
                switched[i] = b[i]
                deviation += user_cost(game, tuple(switched), i)
            lhs = deviation
            rhs = lam * system_value(game, b) + mu * system_value(game, a)
            if lhs > rhs + tol * max(1.0, abs(lhs), abs(rhs)):
                return False
    return True


class TestSmoothnessCertificates:
    def test_lp_certificate_transfers_to_instances(self):
        from poalab.characterize import characterize_cost
        pairs = polynomial_basis(1, 3)
        lam, mu = characterize_cost(pairs).certificate()
        for seed in range(10):
            game = random_in_class_game(pairs, 3, seed=seed)
            assert check_generalized_smoothness(game, lam, mu)

    def test_lambda_zero_fails_on_positive_costs(self):
        game = two_road_game()
        assert not check_generalized_smoothness(game, 0.0, 0.0)

    def test_budget_balanced_matches_original_smoothness(self):
        pairs = polynomial_basis(1, 3)
        for seed in (3, 7, 21):
            game = random_in_class_game(pairs, 3, seed=seed)
            for lam, mu in [(2.0, 0.0), (1.0, 0.5), (0.8, 0.1), (3.0, -0.2)]:
                assert check_generalized_smoothness(game, lam, mu) == \
                    original_smoothness_holds(game, lam, mu)

    def test_pair_cap(self):
        game = two_road_game()
        with pytest.raises(ValueError, match="exceeds cap"):
            check_generalized_smoothness(game, 1.0, 0.0, cap=3)

    def test_bound_values(self):
        assert poa_bound_from_certificate(1.0, 0.0) == 1.0
        assert poa_bound_from_certificate(2.0, 0.0) == 2.0
        assert poa_bound_from_certificate(1.0, 1.0, Side.WELFARE_MAX) == 2.0

    def test_bound_domain(self):
        with pytest.raises(ValueError):
            poa_bound_from_certificate(0.0, 0.0)
        with pytest.raises(ValueError):
            poa_bound_from_certificate(1.0, 1.0)
        with pytest.raises(ValueError):
            poa_bound_from_certificate(1.0, -1.0, Side.WELFARE_MAX)


class TestSerialization:
    def test_round_trip_bit_exact(self):
        game = make_game(
            2,
            [((0.0, 0.1, 1 / 3), (0.0, 1e-3, 0.7, 0.0)),
             ((0.0, 2.5, 5.0), (0.0, 2.5, 2.5, 0.0))],
            [((0,), (1,)), ((0, 1), (1,))],
        )
        assert game_from_json(game_to_json(game)) == game

    def test_schema_keys(self):
        import json

        doc = json.loads(game_to_json(two_road_game()))
        assert set(doc) == {"n", "side", "resources", "actions"}
        assert doc["side"] == "cost"
        assert doc["n"] == 2

    def test_malformed(self):
        with pytest.raises(ValueError, match="malformed"):
            game_from_json('{"n": 1, "side": "cost"}')


class TestRandomInstances:
    def test_deterministic_generation(self):
        pairs = polynomial_basis(1, 3)
        assert random_in_class_game(pairs, 3, seed=5) == random_in_class_game(pairs, 3, seed=5)

    def test_poa_defined(self):
        pairs = polynomial_basis(2, 3)
        for seed in range(20):
            game = random_in_class_game(pairs, 3, seed=seed)
            report = enumerate_equilibria(game)
            assert report.poa is not None
            assert report.poa >= 1.0 - 1e-9

    def test_user_cap(self):
        with pytest.raises(ValueError, match="at most"):
            random_in_class_game(polynomial_basis(1, 2), 3, seed=0)
