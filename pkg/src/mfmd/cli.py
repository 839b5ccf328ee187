"""Command-line interface: orchestration of runs and CSV output.

Commands
--------
density      x, mu_qm, mu_mf, mu_gs at the grid nodes
correlation  tau, S_qm, S_mf, S_es, S_gs (+ scalar-potential quantum variants
             with --scalar-variants); also writes errors.csv with running
             sup errors next to the main output
epsilons     one row per case: q1 and the error functionals
convergence  M, l1_error rows plus a trailing '# slope=...' comment
gibbs        Monte Carlo Weyl-symbol estimate vs the analytic correction
             limit, one row per matrix entry and mass ratio

Every CSV starts with a '#' comment block echoing the full resolved
configuration; floats are printed with 17 significant digits so identical
configurations reproduce byte-identical files.  Exit codes: 0 ok, 1 config
error, 2 numerical failure, 3 domain/validation failure.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np

from . import classical, diagnostics, gibbs, quantum
from .config import RunConfig, config_echo_lines, parse_config
from .errors import (ConfigError, DomainTooSmall, ImaginaryResidueTooLarge,
                     MfmdError, NonConvergence, SingularGradient)
from .grids import PhaseGrid, SpatialGrid, default_p_max
from .model import ModelContext, PotentialParams, eigenvalues, mean_field_potential
from .presets import CASE_PRESETS
from .series import tau_grid


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_csv(path: str, cfg: RunConfig, header: list[str], rows,
               extra_comments=()) -> None:
    lines = config_echo_lines(cfg)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    lines.extend(extra_comments)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _context(cfg: RunConfig) -> ModelContext:
    return ModelContext(PotentialParams(cfg.c, cfg.delta), cfg.beta, cfg.mass_ratio)


def _spatial_grid(cfg: RunConfig) -> SpatialGrid:
    return SpatialGrid(cfg.x_min, cfg.x_max, cfg.K)


def _phase_grid(cfg: RunConfig) -> PhaseGrid:
    p_max = cfg.p_max if cfg.p_max is not None else default_p_max(cfg.beta)
    return PhaseGrid(cfg.x_min, cfg.x_max, cfg.L, -p_max, p_max, cfg.L)


def run_density(cfg: RunConfig) -> None:
    ctx = _context(cfg)
    grid = _spatial_grid(cfg)
    eig = quantum.eigendecompose(quantum.build_hamiltonian(grid, ctx))
    mu_qm = quantum.equilibrium_density(eig, ctx.beta, grid)
    mu_mf = classical.density_mf(ctx, grid)
    mu_gs = classical.density_gs(ctx, grid)
    rows = zip(grid.nodes, mu_qm.values, mu_mf.values, mu_gs.values)
    _write_csv(cfg.output, cfg, ["x", "mu_qm", "mu_mf", "mu_gs"], rows)


def run_correlation(cfg: RunConfig) -> None:
    ctx = _context(cfg)
    grid = _spatial_grid(cfg)
    taus = tau_grid(cfg.tau_max, cfg.d_tau)
    flow = classical.FlowConfig(dt=cfg.dt)
    pgrid = _phase_grid(cfg)
    obs = cfg.observable

    h = quantum.build_hamiltonian(grid, ctx)
    eig = quantum.eigendecompose(h)
    x_mat, a_mat = quantum.observable_matrices(grid, h)
    generator = x_mat if obs == "x" else a_mat
    s_qm = quantum.correlation_qm(eig, generator, ctx.beta, ctx.mass_ratio, taus)
    s_mf = classical.correlation_classical("mf", ctx, pgrid, flow, obs, taus)
    s_es = classical.correlation_excited(ctx, pgrid, flow, obs, taus)
    s_gs = classical.correlation_classical("gs", ctx, pgrid, flow, obs, taus)

    columns = {"S_qm": s_qm, "S_mf": s_mf, "S_es": s_es, "S_gs": s_gs}
    if cfg.scalar_variants:
        for name, potential, kind in (
                ("S_qm_lstar", lambda x: mean_field_potential(x, ctx), "qm_lambda_star"),
                ("S_qm_l0", lambda x: eigenvalues(x, ctx.params)[0], "qm_lambda0")):
            hs = quantum.build_scalar_hamiltonian(grid, ctx, potential)
            eig_s = quantum.eigendecompose(hs)
            xs_mat, as_mat = quantum.observable_matrices(grid, hs)
            gen = xs_mat if obs == "x" else as_mat
            columns[name] = quantum.correlation_qm(eig_s, gen, ctx.beta, ctx.mass_ratio,
                                                   taus, kind)
    header = ["tau"] + list(columns)
    rows = zip(taus, *(series.values for series in columns.values()))
    _write_csv(cfg.output, cfg, header, rows)

    err_cols = {
        "max_err_mf": diagnostics.running_sup_error(s_qm, s_mf),
        "max_err_es": diagnostics.running_sup_error(s_qm, s_es),
        "max_err_gs": diagnostics.running_sup_error(s_qm, s_gs),
    }
    if cfg.scalar_variants:
        err_cols["max_err_qm_lstar"] = diagnostics.running_sup_error(s_qm, columns["S_qm_lstar"])
        err_cols["max_err_lstar_mf"] = diagnostics.running_sup_error(columns["S_qm_lstar"], s_mf)
        err_cols["max_err_qm_l0"] = diagnostics.running_sup_error(s_qm, columns["S_qm_l0"])
        err_cols["max_err_l0_gs"] = diagnostics.running_sup_error(columns["S_qm_l0"], s_gs)
    err_path = str(Path(cfg.output).parent / "errors.csv")
    _write_csv(err_path, cfg, ["tau"] + list(err_cols), zip(taus, *err_cols.values()))


def run_epsilons(cfg: RunConfig) -> None:
    labels = [cfg.case] if cfg.case else sorted(CASE_PRESETS)
    grid = _spatial_grid(cfg)
    rows = []
    for label in labels:
        preset = CASE_PRESETS[label]
        ctx = preset.context(cfg.mass_ratio)
        report = diagnostics.case_report(label, ctx, grid)
        rows.append((label, report.beta, report.c, report.delta, report.q1,
                     report.eps1_sq, report.eps2_sq, report.gamma_lambda))
    _write_csv(cfg.output, cfg,
               ["case", "beta", "c", "delta", "q1", "eps1_sq", "eps2_sq", "gamma_lambda"],
               rows)


def run_convergence(cfg: RunConfig) -> None:
    grid = _spatial_grid(cfg)
    delta = cfg.delta
    comments = []
    if cfg.q1_target is not None:
        delta = diagnostics.solve_delta_for_q1(cfg.beta, cfg.c, cfg.q1_target,
                                               SpatialGrid(cfg.x_min, cfg.x_max, 6000))
        comments.append(f"# delta_solved = {delta:.17g}")
    ctx = ModelContext(PotentialParams(cfg.c, delta), cfg.beta, cfg.mass_ratio)
    m_list = cfg.m_list
    fit = diagnostics.convergence_study(ctx, m_list, grid)
    comments.append(f"# slope={fit.slope:.17g}")
    rows = zip(fit.mass_ratios, fit.errors)
    _write_csv(cfg.output, cfg, ["M", "l1_error"], rows, extra_comments=comments)


def run_gibbs(cfg: RunConfig) -> None:
    ctx = _context(cfg)
    m_list = cfg.m_list if cfg.m_list else (cfg.mass_ratio,)
    path_cfg = gibbs.PathConfig(cfg.n_paths, cfg.n_steps, cfg.seed)
    limit = gibbs.correction_limit(cfg.x, cfg.p, ctx)
    rows = []
    entry_names = {(0, 0): "11", (0, 1): "12", (1, 0): "21", (1, 1): "22"}
    for m in m_list:
        report = gibbs.verify_asymptotics(cfg.x, cfg.p, ctx, path_cfg, [m])
        dev = report.deviations[0]
        classical_sym = gibbs.classical_gibbs_symbol(cfg.x, cfg.p, ctx)
        estimate = classical_sym + dev.scaled_dev / m
        est_err = dev.std_err / m
        for (i, j), name in entry_names.items():
            rows.append((cfg.x, cfg.p, m, name,
                         estimate[i, j].real, estimate[i, j].imag, est_err[i, j],
                         limit[i, j], 0.0, dev.sigma_distance[i, j]))
    _write_csv(cfg.output, cfg,
               ["x", "p", "M", "entry", "re_mean", "im_mean", "std_err",
                "re_limit", "im_limit", "sigma_distance"], rows)


_RUNNERS = {
    "density": run_density,
    "correlation": run_correlation,
    "epsilons": run_epsilons,
    "convergence": run_convergence,
    "gibbs": run_gibbs,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = parse_config(argv)
        if cfg.threads is None and os.environ.get("MFMD_THREADS"):
            try:
                cfg.threads = int(os.environ["MFMD_THREADS"])
            except ValueError as exc:
                raise ConfigError(f"bad MFMD_THREADS value: {exc}") from exc
        if cfg.threads is not None and gibbs.HAVE_NUMBA:
            import numba

            numba.set_num_threads(max(1, min(cfg.threads, numba.config.NUMBA_NUM_THREADS)))
        _RUNNERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"mfmd: config error: {exc}", file=sys.stderr)
        return 1
    except (NonConvergence, ImaginaryResidueTooLarge) as exc:
        print(f"mfmd: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (DomainTooSmall, SingularGradient, MfmdError) as exc:
        print(f"mfmd: domain/validation failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
