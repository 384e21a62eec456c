#!/usr/bin/env python3
"""End-to-end smoke test for the projlab Python bindings.

Build the extension, then run this script:

    cargo build -p projlab-python --release
    python3 python/smoke_test.py
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))
import projlab as pl


def close(a, b, rel=1e-9, abs_tol=0.0):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol)


def check_geometry():
    rng = np.random.default_rng(2024)
    span = rng.standard_normal((5, 8)).tolist()
    s = pl.Subspace(span)
    assert s.ambient_dim == 8 and s.dim == 5
    assert s.gram_defect() < 1e-12

    x = rng.standard_normal(8)
    px = s.project(x)  # numpy arrays are accepted directly
    assert len(px) == 8
    ppx = s.project(px)
    assert max(abs(a - b) for a, b in zip(px, ppx)) < 1e-10, "projection idempotent"
    assert s.contains(px)

    lam = 1.7
    rx = s.relaxed_project(lam, x)
    for i in range(8):
        assert close(rx[i], (1 - lam) * x[i] + lam * px[i], rel=1e-12, abs_tol=1e-12)
    # Norm decrease: ‖x‖² − ‖P_λx‖² = λ(2−λ)‖x−Px‖².
    nx2 = sum(v * v for v in x)
    nrx2 = sum(v * v for v in rx)
    d2 = sum((a - b) ** 2 for a, b in zip(x, px))
    assert close(nx2 - nrx2, lam * (2 - lam) * d2, rel=1e-10)
    assert close(s.distance(x), math.sqrt(d2), rel=1e-10)

    comp = s.complement()
    assert comp.dim == 3
    qx = comp.project(x)
    assert max(abs(px[i] + qx[i] - x[i]) for i in range(8)) < 1e-10
    assert s.intersect(comp).dim == 0
    assert pl.Subspace.zero(8).dim == 0 and pl.Subspace.full(8).dim == 8
    print("[ok] subspace geometry and projection identities")


def two_lines(theta):
    v = pl.Subspace([[1.0, 0.0]])
    w = pl.Subspace([[math.cos(theta), math.sin(theta)]])
    return v, w, pl.SubspaceSystem([v, w])


def check_angles():
    theta = math.pi / 6
    v, w, system = two_lines(theta)
    rep = pl.friedrichs_angle(v, w)
    assert close(rep.phi, theta, rel=1e-12)
    assert close(rep.kappa_pair, 2 / math.sin(theta), rel=1e-12)
    assert rep.intersection_dim == 0
    angles = pl.principal_angles(v, w)
    assert len(angles) == 1 and close(angles[0], theta, rel=1e-12)
    assert close(pl.sin_friedrichs_oracle(v, w), math.sin(theta), rel=1e-3)

    cert = system.certificate()
    assert close(cert.kappa_star, 4.0, rel=1e-9)
    assert cert.worst_pair == ([1], [2])
    assert cert.innately_regular
    assert close(cert.min_phi, theta, rel=1e-9)
    pairs = cert.table()
    assert any(p.set_i == [1] and p.set_j == [2] for p in pairs)
    assert close(pl.kappa_star(system).kappa_star, cert.kappa_star, rel=0, abs_tol=0)

    kappa_emp = pl.empirical_regularity_kappa(system, [0, 1], 2000, 5)
    assert kappa_emp <= cert.kappa_star * (1 + 1e-9)
    print("[ok] Friedrichs angles and kappa_star certificate")


def check_constants():
    c = pl.constants_for_kappa(2.0, 1, 1.0, 1.0)
    assert c.c_seq == [1.0] and c.moment_bound() == 1.0

    c = pl.constants_for_kappa(4.0, 3, 0.5, 2.0)
    assert 1 - 0.5 < c.beta_star < 1.0
    assert c.ln_beta_star < 0
    assert c.eps_star == 0.5 * 4.0**-3
    seq = c.c_seq
    assert len(seq) == 3 and seq[0] < seq[1] < seq[2]
    assert c.moment_bound() <= c.c_closed * (1 + 1e-12)
    assert c.rho_star > 0 and c.c_star > 1
    assert c.rearrangement_bound(0) > c.rearrangement_bound(10)
    assert c.s_tau_bound(1.0) > 0
    c1 = c.with_gamma(1.0)
    assert c1.gamma == 1.0 and c1.kappa_star == c.kappa_star

    grid = pl.default_tau_grid(c)
    assert 1 <= len(grid) <= 65
    assert grid[0] == 1.0 and all(t > 0 for t in grid)
    assert all(a > b for a, b in zip(grid, grid[1:]))

    try:
        pl.constants_for_kappa(2.0, 1, 0.0, 1.0)
        raise AssertionError("eta = 0 must be rejected")
    except ValueError:
        pass
    print("[ok] theoretical constants")


def check_trajectory():
    theta = math.pi / 6
    _, _, system = two_lines(theta)
    policy = pl.ControlPolicy.cyclic()
    schedule = pl.RelaxationSchedule.constant(1.0, 1.0)
    record = pl.run_trajectory(system, policy, schedule, [1.0, 0.0],
                               retain_iterates=True)
    assert record.steps > 100
    assert record.controls[:4] == [0, 1, 0, 1]
    assert all(l == 1.0 for l in record.relaxations)
    assert record.norms[0] == 1.0 == record.x0_norm

    # Alternating exact projections telescope into closed-form moment sums.
    m1 = record.moment_sum(1.0)
    m2 = pl.moment_sum(record, 2.0)
    assert close(m1, 0.5 / (1 - math.sqrt(3) / 2), rel=1e-6)
    assert close(m2, 1.0, rel=1e-8)

    assert pl.verify_growth_lemma(record, system) == []
    assert pl.verify_displacement_membership(record, system)

    cert = system.certificate()
    consts = cert.constants(1.0, 1.0)
    assert pl.verify_small_theta_dichotomy(record, system, consts) == "holds"
    seg = pl.segment_induction_test(record, system, consts)
    assert seg.passed and seg.failures == []
    assert seg.windows_checked > 10
    assert (seg.translation_displacements_ok and seg.translation_steps_ok
            and seg.translation_membership_ok and seg.base_case_ok)

    taus = pl.default_tau_grid(consts)
    prof = pl.profile(record, [0.5, 1.0, 2.0], taus)
    assert close(max(prof.deltas), 0.5, rel=1e-9)  # δ ≤ sin θ at η = 1
    assert prof.sorted_deltas[0] >= prof.sorted_deltas[-1]
    assert prof.s_at(1.0) == 0

    report = pl.check_bounds(prof, consts)
    assert report.verdict
    assert all(m.ratio <= 1 + 1e-9 for m in report.empirical_moment)
    assert all(s.empirical <= s.bound * (1 + 1e-9) for s in report.s_tau_pairs)
    assert all(r.delta_star <= r.bound * (1 + 1e-9)
               for r in report.rearrangement_pairs)
    assert report.s_at_one == 0 and report.s_one_side_check

    # A short explicit run stops when the control sequence is exhausted.
    short = pl.run_trajectory(system, pl.ControlPolicy.explicit([0, 1, 1, 0]),
                              schedule, [0.3, 0.7])
    assert short.steps == 4 and short.iterates is None
    print("[ok] trajectory, per-step verifiers, and bound checks")


def check_ensemble():
    rng = np.random.default_rng(7)
    members = [pl.Subspace(rng.standard_normal((d, 5)).tolist()) for d in (2, 3, 1)]
    system = pl.SubspaceSystem(members)
    assert len(system) == 3 and system.member_dims == [2, 3, 1]
    assert system.member(1).dim == 3
    assert system.intersection([0, 1, 2]).dim == 0
    try:
        system.intersection([])
        raise AssertionError("empty index list must be rejected")
    except ValueError:
        pass

    policies = [pl.ControlPolicy.cyclic(), pl.ControlPolicy.uniform_random(7),
                pl.ControlPolicy.greedy(),
                pl.ControlPolicy.adversarial_gap([(0, 25), (1, 1), (2, 1)])]
    schedules = [pl.RelaxationSchedule.constant(0.5, 1.3),
                 pl.RelaxationSchedule.uniform_random_in_band(0.5, 11)]
    report = pl.ensemble_sweep(system, policies, schedules, 12, [1.0, 2.0],
                               seed=42)
    assert report.n_trajectories == 12 and len(report.rows) == 12
    assert report.all_verdicts_hold
    assert report.max_s_ratio <= 1 + 1e-9
    assert report.max_rearrangement_ratio <= 1 + 1e-9
    assert all(r <= 1 + 1e-9 for _, r in report.max_moment_ratio_per_gamma)
    assert {r.policy for r in report.rows} == {"cyclic", "uniform_random",
                                               "greedy", "adversarial_gap"}
    assert report.worst_report.verdict and report.worst_profile.x0_norm > 0

    # Any member replays exactly from its derived inputs.
    idx = report.worst[0].index
    policy, schedule, x0, seeds = pl.sweep_member_inputs(policies, schedules,
                                                         5, 42, idx)
    assert seeds[0] == report.rows[idx].seed
    assert close(sum(v * v for v in x0), 1.0, rel=1e-12)
    replay = pl.run_trajectory(system, policy, schedule, x0)
    assert replay.steps == report.rows[idx].steps

    again = pl.ensemble_sweep(system, policies, schedules, 12, [1.0, 2.0],
                              seed=42)
    assert [r.seed for r in again.rows] == [r.seed for r in report.rows]
    assert [r.steps for r in again.rows] == [r.steps for r in report.rows]
    assert again.max_s_ratio == report.max_s_ratio
    assert again.worst_seeds == report.worst_seeds
    print("[ok] deterministic ensemble sweep and member replay")


def check_errors():
    _, _, system = two_lines(math.pi / 4)
    try:
        system.member(99)
        raise AssertionError("out-of-range member must raise IndexError")
    except IndexError:
        pass
    try:
        pl.RelaxationSchedule.constant(0.5, 1.9)
        raise AssertionError("λ outside [η, 2−η] must raise ValueError")
    except ValueError:
        pass
    try:
        pl.run_trajectory(system, pl.ControlPolicy.explicit([0, 5]),
                          pl.RelaxationSchedule.constant(1.0, 1.0), [1.0, 0.0])
        raise AssertionError("invalid explicit control must raise IndexError")
    except IndexError:
        pass

    eyes = np.eye(11).tolist()
    big = pl.SubspaceSystem([pl.Subspace([row], 11) for row in eyes])
    try:
        big.certificate()
        raise AssertionError("11-member enumeration must hit the capacity guard")
    except RuntimeError:
        pass
    print("[ok] error mapping (ValueError / IndexError / RuntimeError)")


def main():
    print(f"projlab {pl.__version__} smoke test")
    check_geometry()
    check_angles()
    check_constants()
    check_trajectory()
    check_ensemble()
    check_errors()
    print("smoke test passed")


if __name__ == "__main__":
    main()
