"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria 4 (oracle equivalence) and 5 (property invariants) live in their
own modules; they are re-run here so this module alone exercises every
criterion end to end.  The benchmark replications (criteria 1 and 2) are
the slow part: about five minutes total on two cores.
"""

import numpy as np
import pytest

import test_invariants
import test_oracle
from conftest import planted_with_outliers
from rfcpca.cli import build_parser
from rfcpca.dataset import read_csv_dir, write_csv_dir
from rfcpca.experiments import make_benchmark_dataset, run_benchmark
from rfcpca.robust import fit_rfcpca_n, fit_rfcpca_t, select_lambda_elbow

TABLE1_SEED = 2024
TABLE4_SEED = 4242


def _report(name, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {name}: {status} ({detail})")
    return passed


def _by_variant(summary):
    return {row["variant"]: row for row in summary}


@pytest.fixture(scope="module")
def table1_summary():
    _, summary = run_benchmark("burst", [32], 400, replications=10,
                               seed=TABLE1_SEED, rho=0.20)
    return _by_variant(summary)


@pytest.fixture(scope="module")
def table4_summary():
    _, summary = run_benchmark("eyeblink", [32], (400, 2000), replications=10,
                               seed=TABLE4_SEED, rho=0.40)
    return _by_variant(summary)


@pytest.fixture(scope="module")
def burst_elbow():
    dataset, _ = make_benchmark_dataset("burst", 32, 400, seed=21)
    return select_lambda_elbow(dataset, 2, m=2.0, v=0.95, seed=1)


class TestCriterion1Table1Burst:
    """Burst benchmark, rho=0.20, N=20, p=32, T=400, 10 seeds."""

    def test_trimmed_variant(self, table1_summary):
        row = table1_summary["t"]
        ok = row["acc_mean"] >= 0.95 and row["out_recall_mean"] >= 0.90
        assert _report("1 (table 1, RFCPCA-T)", ok,
                       f"acc={row['acc_mean']:.3f} out={row['out_recall_mean']:.3f} "
                       f"alpha={row['alpha_mean']:.2f}")

    def test_exponential_variant(self, table1_summary):
        row = table1_summary["e"]
        ok = row["acc_mean"] >= 0.95 and row["out_recall_mean"] >= 0.55
        assert _report("1 (table 1, RFCPCA-E)", ok,
                       f"acc={row['acc_mean']:.3f} out={row['out_recall_mean']:.3f}")

    def test_noise_variant(self, table1_summary):
        row = table1_summary["n"]
        ok = row["out_recall_mean"] >= 0.55
        assert _report("1 (table 1, RFCPCA-N)", ok,
                       f"out={row['out_recall_mean']:.3f}")

    def test_baseline_detects_nothing(self, table1_summary):
        row = table1_summary["fcpca"]
        ok = row["out_recall_mean"] <= 0.10
        assert _report("1 (table 1, FCPCA)", ok,
                       f"out={row['out_recall_mean']:.3f}")


class TestCriterion2Table4Eyeblink:
    """Eye-blink benchmark, rho=0.40, variable lengths, p=32, 10 seeds."""

    def test_exponential_variant(self, table4_summary):
        row = table4_summary["e"]
        ok = row["out_recall_mean"] >= 0.90 and row["acc_mean"] >= 0.95
        assert _report("2 (table 4, RFCPCA-E)", ok,
                       f"acc={row['acc_mean']:.3f} out={row['out_recall_mean']:.3f}")

    def test_trimmed_variant(self, table4_summary):
        row = table4_summary["t"]
        ok = row["out_recall_mean"] >= 0.90 and row["acc_mean"] >= 0.95
        assert _report("2 (table 4, RFCPCA-T)", ok,
                       f"acc={row['acc_mean']:.3f} out={row['out_recall_mean']:.3f}")

    def test_selected_alpha_in_band(self, table4_summary):
        row = table4_summary["t"]
        ok = 0.30 <= row["alpha_mean"] <= 0.55
        assert _report("2 (table 4, selected alpha)", ok,
                       f"alpha={row['alpha_mean']:.3f}")


class TestCriterion3LambdaElbow:
    """Shape of the outlier-fraction curve on a seeded burst instance.

    Run at the library-default variance fraction, where the two groups'
    clean residuals share one scale and the noise cluster absorbs them in
    a single step after the contamination plateau.
    """

    def test_curve_shape_and_selection(self, burst_elbow):
        elbow = burst_elbow
        lams, fracs = map(np.asarray, zip(*elbow.curve))
        at_one = fracs[0]
        jumps = np.diff(fracs)
        pre_jump = int(np.argmax(jumps))
        plateau = fracs[pre_jump]
        ok = (
            at_one == 0.0
            and 0.10 <= plateau <= 0.30
            and fracs[-1] >= 0.90
            and elbow.lambda_star == lams[pre_jump]
            and not elbow.no_elbow
        )
        assert _report(
            "3 (lambda elbow shape)", ok,
            f"f(1)={at_one:.2f} plateau={plateau:.2f} f(min)={fracs[-1]:.2f} "
            f"lambda*={elbow.lambda_star:.5g}")


class TestCriterion4OracleEquivalence:
    def test_all_instances(self):
        for seed in range(test_oracle.N_INSTANCES):
            test_oracle.test_oracle_equivalence(seed)
        _report("4 (oracle equivalence)", True,
                f"{test_oracle.N_INSTANCES} instances, rtol=1e-8")


class TestCriterion5InvariantSuite:
    def test_all_properties(self):
        checks = [
            test_invariants.test_membership_updates_row_stochastic,
            test_invariants.test_fits_preserve_row_stochastic_memberships,
            test_invariants.test_fcpca_objective_monotone_non_increasing,
            test_invariants.test_projectors_symmetric_idempotent,
            test_invariants.test_exponential_loss_bounded_by_one,
            test_invariants.test_zero_trimming_bit_identical_to_baseline,
            test_invariants.test_permutation_equivariance_of_cluster_labels,
            test_invariants.test_simgen_determinism_and_replay_exactness,
            test_invariants.test_principal_angle_symmetry_and_rotation_invariance,
            test_invariants.test_channel_contribution_trace_identity,
        ]
        for check in checks:
            check()
        _report("5 (invariant suite)", True, f"{len(checks)} properties x 200 cases")


class TestCriterion6PlantedOutliers:
    """Ten series (eight structured, two gross) per seed, ten seeds."""

    def test_trimming_recovers_planted_pair(self):
        hits = 0
        for seed in range(10):
            dataset, outliers = planted_with_outliers(200 + seed)
            fit = fit_rfcpca_t(dataset, 2, m=2.0, alpha=0.2, seed=seed)
            hits += set(fit.flagged.tolist()) == set(outliers.tolist())
        ok = hits >= 9
        assert _report("6 (planted pair trimmed)", ok, f"{hits}/10 seeds")

    def test_noise_cluster_flags_planted_pair(self):
        hits = 0
        for seed in range(10):
            dataset, outliers = planted_with_outliers(100 + seed)
            elbow = select_lambda_elbow(dataset, 2, m=2.0, seed=seed)
            fit = fit_rfcpca_n(dataset, 2, m=2.0, lam=elbow.lambda_star, seed=seed)
            noise = fit.memberships.u[outliers, -1]
            hits += bool(np.all(noise >= 0.5))
        ok = hits >= 8
        assert _report("6 (noise memberships >= 0.5)", ok, f"{hits}/10 seeds")


class TestCriterion7FullScaleSurfaces:
    """Full-scale runs are out of desk scope; the surfaces must exist."""

    def test_full_flag_exists(self):
        parser = build_parser()
        args = parser.parse_args(["reproduce", "table1", "--full", "--out", "x"])
        assert args.full is True
        args = parser.parse_args(["reproduce", "table1", "--out", "x"])
        assert args.full is False
        _report("7 (--full flag present)", True, "desk scale defaults to p in {32,64}, R=10")

    def test_real_data_csv_ingest_path(self, tmp_path):
        # external recordings arrive as plain trial CSVs with no manifest;
        # the loader and a fit must work on them directly
        from rfcpca.core import fit_fcpca
        from conftest import planted_dataset

        dataset, _ = planted_dataset(400)
        write_csv_dir(dataset, tmp_path)
        loaded = read_csv_dir(tmp_path)
        fit = fit_fcpca(loaded, 2, m=2.0, seed=0)
        assert fit.converged
        _report("7 (real-data CSV ingest)", True,
                "trial_*.csv directories load and fit without a manifest")
