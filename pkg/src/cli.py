"""
コマンドラインインターフェース

    python -m src.cli calibrate --n 3
    python -m src.cli verify --check kappa-inf --n 3 --z-re 2.5
    python -m src.cli verify --all --n 3 --out reports/verify
    python -m src.cli converge --n 3 --p 1 --z-re 2.6
    python -m src.cli kernel --n 3 --R 101 --z-re 2.5 --split
    python -m src.cli heat --n 3 --t 0.5

終了コード: 0 合格, 1 検証失敗, 2 設定エラー, 3 数値予算エラー
"""

import argparse
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from . import __version__
from .data.loader import CalibrationStore, load_defaults, merge_config
from .data.validator import RunConfig, RunConfigValidator, parse_R_grid
from .errors import RieszError
from .geometry.space import modular_check, phi0_bound_check, volume_check
from .kernels.cutoff import split_kernel
from .kernels.heat import (
    check_heat_crude_bound,
    check_heat_l2_and_tail,
    check_heat_sharp_bound,
    check_local_heat_domination,
    heat_kernel,
)
from .kernels.riesz_kernel import (
    check_bessel_derivative_bound,
    check_dyadic_pieces,
    check_lq_infinity,
    fourier_ratio_check,
    infinity_kernel_bound_check,
    local_l1_check,
    riesz_kernel,
)
from .multipliers.mellin import check_dyadic_sobolev_growth, mellin_decay_check
from .multipliers.partition import check_hhat_tail, check_hjr_derivative_norms, support_length_check
from .multipliers.riesz_symbols import RieszParams
from .reporting.bound_report import BoundReport
from .reporting.envelope import CalibrationEntry, ProfileEntry, ReportEnvelope
from .riesz.operator import convergence_experiment, heat_sample, maximal_grid_stability
from .transforms.spherical import calibrate, ensure_calibrated


def _section(run: RunConfig, name: str) -> Dict:
    return run.settings.get("checks", {}).get(name, {})


def _growth(run: RunConfig, section: Dict, default_key: str = "refinement_growth") -> float:
    return float(section.get("growth", run.settings.get("checks", {}).get(default_key, 0.05)))


def _slope_tol(run: RunConfig, section: Dict) -> float:
    return float(section.get("slope_tolerance", run.settings.get("checks", {}).get("slope_tolerance", 0.15)))


def _run_phi0(run: RunConfig) -> BoundReport:
    s = _section(run, "phi0")
    return phi0_bound_check(run.space, s.get("r_min", 0.1), s.get("r_max", 20.0), s.get("points", 200), _growth(run, s), run.quad)


def _run_modular(run: RunConfig) -> BoundReport:
    s = _section(run, "modular")
    return modular_check(run.space, s.get("r_max", 20.0), s.get("points", 200), _growth(run, s))


def _run_vol(run: RunConfig) -> BoundReport:
    s = _section(run, "vol")
    return volume_check(run.space, s.get("r_min", 0.01), s.get("r_max", 1.0), s.get("points", 50), _growth(run, s), run.quad)


def _heat_grids(s: Dict):
    ts = np.geomspace(s["t_min"], s["t_max"], s["t_points"])
    rs = np.linspace(0.0, s["r_max"], s["r_points"])
    return ts, rs


def _run_heat_crude(run: RunConfig) -> BoundReport:
    s = _section(run, "heat_crude")
    ts, rs = _heat_grids(s)
    return check_heat_crude_bound(run.space, ts, rs, _growth(run, s), run.quad)


def _run_heat_sharp(run: RunConfig) -> BoundReport:
    s = _section(run, "heat_sharp")
    ts, rs = _heat_grids(s)
    return check_heat_sharp_bound(run.space, ts, rs, _growth(run, s), run.quad)


def _run_heat_tail(run: RunConfig) -> BoundReport:
    s = _section(run, "heat_tail")
    ts = np.geomspace(s["t_min"], s["t_max"], s["t_points"])
    a_grid = np.linspace(s["a_min"], s["a_max"], s["a_points"])
    return check_heat_l2_and_tail(run.space, ts, a_grid, D=s.get("D", 8.0), growth_tolerance=_growth(run, s), quad=run.quad)


def _run_local_heat(run: RunConfig) -> BoundReport:
    s = _section(run, "heat_tail")
    ts = np.geomspace(s.get("t_min", 0.05), s.get("t_max", 2.0), s.get("t_points", 8))
    local = _section(run, "local_heat")
    rs = np.linspace(0.0, local.get("r_max", 3.0), local.get("r_points", 31))
    return check_local_heat_domination(
        run.space, ts, rs, quad=run.quad, tolerance=float(local.get("reference_tolerance", 1e-5))
    )


def _z_values(run: RunConfig, defaults) -> List[complex]:
    if run.z_re is not None:
        return [run.z(run.z_re)]
    return [run.z(float(v)) for v in defaults]


def _run_l1ball(run: RunConfig) -> BoundReport:
    s = _section(run, "l1ball")
    z_offset = s.get("z_offset", 0.6)
    return local_l1_check(
        run.space,
        z_offset=z_offset,
        R_offsets=s.get("R_offsets", (1.0, 10.0, 100.0, 1000.0, 10000.0)),
        growth_tolerance=_growth(run, s),
        z=run.z(run.n / 2.0 + z_offset),
        quad=run.quad,
        spread_tolerance=s.get("spread", 10.0),
        spread_min_offset=s.get("spread_min_offset", 10.0),
    )


def _run_kappa_inf(run: RunConfig) -> BoundReport:
    s = _section(run, "kappa_inf")
    z_grid = _z_values(run, s.get("z_values", (2.5, 4.0)))
    return infinity_kernel_bound_check(
        run.space,
        z_grid=z_grid,
        R_grid=s.get("R_offsets", (1.0, 10.0, 100.0, 1000.0, 10000.0)),
        r_min=s.get("r_min", 1.1),
        r_max=s.get("r_max", 10.0),
        r_points=s.get("r_points", 60),
        slope_tolerance=_slope_tol(run, s),
        growth_tolerance=_growth(run, {}),
        quad=run.quad,
    )


def _run_fourier(run: RunConfig) -> BoundReport:
    return fourier_ratio_check(run.space, quad=run.quad)


def _run_bessel_deriv(run: RunConfig) -> BoundReport:
    s = _section(run, "bessel_deriv")
    return check_bessel_derivative_bound(
        run.space,
        z=run.z_re if run.z_re is not None else s.get("z", 2.0),
        orders=s.get("orders", (0, 1, 2)),
        R_grid=s.get("R_offsets", (1.0, 10.0, 100.0)),
        H_min=s.get("H_min", 0.5),
        H_max=s.get("H_max", 10.0),
        H_points=s.get("H_points", 200),
        growth_tolerance=_growth(run, s),
    )


def _run_alexo6(run: RunConfig) -> BoundReport:
    s = _section(run, "alexo6")
    return support_length_check(
        run.space,
        run.z(3.0),
        j_max=s.get("j_max", 8),
        r_values=s.get("r_values", (2.0, 8.0, 32.0)),
        growth_tolerance=_growth(run, s),
    )


def _run_alexo7(run: RunConfig) -> BoundReport:
    s = _section(run, "alexo7")
    r_values = s.get("r_values", (128.0, 512.0, 2048.0))
    p = RieszParams(run.space, float(r_values[0]) ** 2, run.z(s.get("z", 3.0)))
    return check_hjr_derivative_norms(
        p,
        j_range=range(s.get("j_min", 3), s.get("j_max", 8) + 1),
        k_max=s.get("k_max", 2),
        r_values=r_values,
        slope_tolerance=_slope_tol(run, s),
        r_tolerance=s.get("r_tolerance", 0.1),
        growth_tolerance=_growth(run, s),
    )


def _run_hhat(run: RunConfig) -> BoundReport:
    s = _section(run, "hhat")
    p = RieszParams(run.space, float(s.get("r", 8.0)) ** 2, run.z(s.get("z", 3.0)))
    return check_hhat_tail(
        p,
        j=s.get("j", 2),
        k=s.get("k", 2),
        s_range=np.geomspace(s.get("s_min", 1.0), s.get("s_max", 20.0), s.get("s_points", 20)),
        j_values=s.get("j_values", (1, 2, 3, 4)),
        slope_tolerance=s.get("slope_tolerance", 0.2),
        growth_tolerance=_growth(run, s),
        quad=run.quad,
    )


def _run_mellin(run: RunConfig) -> BoundReport:
    s = _section(run, "mellin")
    z_values = _z_values(run, s.get("z_values", (1.0, 2.5)))
    return mellin_decay_check(
        z_values=z_values,
        gamma_min=s.get("gamma_min", 5.0),
        gamma_max=s.get("gamma_max", 200.0),
        gamma_points=s.get("gamma_points", 40),
        reconstruction_points=s.get("reconstruction_points", (0.25, 0.5, 0.9)),
        reconstruction_cutoff=s.get("reconstruction_cutoff", 400.0),
        reconstruction_tolerance=s.get("reconstruction_tolerance", 1e-4),
        slope_tolerance=s.get("slope_tolerance", 0.2),
        growth_tolerance=_growth(run, s),
        quad=run.quad,
    )


def _run_sobolev_growth(run: RunConfig) -> BoundReport:
    s = _section(run, "sobolev_growth")
    return check_dyadic_sobolev_growth(
        run.space,
        gamma_range=np.geomspace(s.get("gamma_min", 10.0), s.get("gamma_max", 200.0), s.get("gamma_points", 12)),
        k_max=s.get("k_max", 6),
        slope_tolerance=s.get("slope_tolerance", 0.2),
        growth_tolerance=_growth(run, s),
    )


def _run_dyadic_pieces(run: RunConfig) -> BoundReport:
    s = _section(run, "dyadic_pieces")
    p = RieszParams.from_offset(run.space, s.get("R_offset", 100.0), run.z(s.get("z", 3.0)))
    rs = np.linspace(0.0, s.get("r_max", 3.0), s.get("r_points", 30))
    return check_dyadic_pieces(run.space, p, rs, quad=run.quad)


def _run_lq_infinity(run: RunConfig) -> BoundReport:
    s = _section(run, "lq_infinity")
    return check_lq_infinity(
        run.space,
        q_exp=s.get("q", 4.0),
        R_offsets=s.get("R_offsets", (1.0, 10.0, 100.0)),
        r_max=s.get("r_max", 10.0),
        growth_tolerance=_growth(run, s),
        z=run.z(run.n - 0.5),
        quad=run.quad,
    )


CHECKS: Dict[str, Callable[[RunConfig], BoundReport]] = {
    "phi0": _run_phi0,
    "modular": _run_modular,
    "vol": _run_vol,
    "heat-crude": _run_heat_crude,
    "heat-sharp": _run_heat_sharp,
    "heat-tail": _run_heat_tail,
    "local-heat": _run_local_heat,
    "l1ball": _run_l1ball,
    "kappa-inf": _run_kappa_inf,
    "fourier": _run_fourier,
    "bessel-deriv": _run_bessel_deriv,
    "alexo6": _run_alexo6,
    "alexo7": _run_alexo7,
    "hhat": _run_hhat,
    "mellin": _run_mellin,
    "sobolev-growth": _run_sobolev_growth,
    "dyadic-pieces": _run_dyadic_pieces,
    "lq-infinity": _run_lq_infinity,
}

# Bessel次数 z+1/2 は実数のみ
REAL_ORDER_CHECKS = ("bessel-deriv",)
# Sobolevノルムの微分は3階まで（[n/2]+1 ≤ 3）
CHECK_MAX_DIMENSION = {"sobolev-growth": 5}


def _applicable_checks(n: int, z_im: float) -> Tuple[List[str], Dict[str, str]]:
    """--all で実行する検証項目と、飛ばす項目の理由"""
    checks, skipped = [], {}
    for name in CHECKS:
        limit = CHECK_MAX_DIMENSION.get(name)
        if limit is not None and n > limit:
            skipped[name] = f"supports n <= {limit}"
        elif name in REAL_ORDER_CHECKS and z_im != 0.0:
            skipped[name] = "needs real z"
        else:
            checks.append(name)
    return checks, skipped


def _store(run: RunConfig) -> CalibrationStore:
    return CalibrationStore(run.settings.get("calibration", {}).get("store_path", "calibration.yaml"))


def _calibration_kwargs(run: RunConfig) -> Dict:
    c = run.settings.get("calibration", {})
    return {
        "heat_time": c.get("heat_time", 1.0),
        "radii": c.get("check_radii", (0.0, 0.5, 1.0, 2.0)),
        "tolerance": c.get("tolerance", 1e-6),
    }


def cmd_calibrate(run: RunConfig) -> ReportEnvelope:
    """逆変換定数を較正して保存する"""
    envelope = ReportEnvelope("calibrate", run.echo())
    kwargs = _calibration_kwargs(run)
    result = calibrate(run.space, run.quad, **kwargs)
    _store(run).put(run.n, result.constant, result.residual)
    envelope.add(CalibrationEntry(run.n, result.constant, result.residual, kwargs["tolerance"]))
    return envelope


def cmd_verify(run: RunConfig) -> ReportEnvelope:
    """選んだ検証項目を順に実行する"""
    envelope = ReportEnvelope("verify", run.echo())
    ensure_calibrated(run.space, run.quad, store=_store(run), **_calibration_kwargs(run))
    for name in run.checks:
        logger.info(f"Running check {name}")
        start = time.perf_counter()
        try:
            report = CHECKS[name](run)
        except RieszError as exc:
            raise type(exc)(f"check {name}: {exc}") from exc
        logger.info(f"Check {name}: {'passed' if report.passed else 'FAILED'} in {time.perf_counter() - start:.2f}s")
        envelope.add(report)
    return envelope


def cmd_converge(run: RunConfig) -> ReportEnvelope:
    """熱核を試験関数とする収束実験"""
    envelope = ReportEnvelope("converge", run.echo())
    conv = run.settings.get("convergence", {})
    sp = run.space
    ensure_calibrated(sp, run.quad, store=_store(run), **_calibration_kwargs(run))
    R_grid = run.R_values()
    if R_grid is None:
        R_grid = sp.rho ** 2 + np.asarray(conv.get("R_offsets", (10.0, 100.0, 1000.0, 10000.0)), dtype=float)
    xs = np.linspace(0.0, conv.get("x_max", 3.0), conv.get("x_points", 13))
    f = heat_sample(sp, conv.get("heat_time", 0.5), run.quad)
    report = convergence_experiment(
        sp,
        run.z(conv.get("z", 2.6)),
        f,
        run.p,
        xs,
        R_grid,
        run.quad,
        final_tolerance=conv.get("final_tolerance", 1e-3),
    )
    offset_min, offset_max, points = run.R_offset_range()
    tolerance = conv.get("maximal_stability", 0.02)
    stability = maximal_grid_stability(
        sp,
        report.z,
        f,
        xs,
        points=points,
        tolerance=tolerance,
        quad=run.quad,
        offset_min=offset_min,
        offset_max=offset_max,
    )
    report.maximal_change = stability["change"]
    report.maximal_tolerance = tolerance
    logger.info(f"Maximal function under R-grid doubling: change {stability['change']:.3%}")
    envelope.add(report)
    return envelope


def _profile_rs(run: RunConfig) -> np.ndarray:
    grids = run.settings.get("grids", {})
    return np.linspace(0.0, grids.get("r_max", 20.0), grids.get("r_points", 200))


def cmd_kernel(run: RunConfig, split: bool = False) -> ReportEnvelope:
    """Riesz核 κ_R^z の断面を出力する"""
    envelope = ReportEnvelope("kernel", run.echo())
    sp = run.space
    ensure_calibrated(sp, run.quad, store=_store(run), **_calibration_kwargs(run))
    R = run.R if run.R is not None else sp.rho ** 2 + 100.0
    p = RieszParams(sp, R, run.z(sp.n - 0.5))
    kernel = riesz_kernel(sp, p, _profile_rs(run), run.quad)
    profiles = [kernel] + (list(split_kernel(kernel)) if split else [])
    for k in profiles:
        envelope.add(ProfileEntry(k.label, k.rs, k.values, k.floor, k.params))
    return envelope


def cmd_heat(run: RunConfig) -> ReportEnvelope:
    """熱核 p_t の断面を出力する"""
    envelope = ReportEnvelope("heat", run.echo())
    sp = run.space
    ensure_calibrated(sp, run.quad, store=_store(run), **_calibration_kwargs(run))
    k = heat_kernel(sp, run.t, _profile_rs(run), run.quad)
    envelope.add(ProfileEntry(k.label, k.rs, k.values, k.floor, k.params))
    return envelope


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riesz-verify", description="Riesz means on real hyperbolic space: numerical checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="dimension of H^n (n >= 2)")
    common.add_argument("--z-re", type=float, default=None, dest="z_re", help="Re z (default depends on the command)")
    common.add_argument("--z-im", type=float, default=0.0, dest="z_im", help="Im z")
    common.add_argument("--R", type=float, default=None, help="spectral scale R > rho^2")
    common.add_argument("--R-grid", type=str, default=None, dest="R_grid", help="R grid as min:max:count[:log|lin]")
    common.add_argument("--p", type=float, default=None, help="exponent p in [1, 2]")
    common.add_argument("--t", type=float, default=None, help="heat time t > 0")
    common.add_argument("--rel-tol", type=float, default=None, dest="rel_tol")
    common.add_argument("--abs-tol", type=float, default=None, dest="abs_tol")
    common.add_argument("--out", type=str, default=None, help="output path without extension")
    common.add_argument("--format", choices=["csv", "json"], default=None, dest="fmt")
    common.add_argument("--config", type=str, default=None, help="YAML file overriding the defaults")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("calibrate", parents=[common], help="calibrate the inverse transform constant")
    verify = sub.add_parser("verify", parents=[common], help="run bound checks")
    group = verify.add_mutually_exclusive_group(required=True)
    group.add_argument("--check", action="append", default=None, help="check name (repeatable)")
    group.add_argument("--all", action="store_true", help="run every check")
    group.add_argument("--list", action="store_true", help="print the check names")
    sub.add_parser("converge", parents=[common], help="convergence experiment with a heat kernel")
    kernel = sub.add_parser("kernel", parents=[common], help="dump the Riesz kernel profile")
    kernel.add_argument("--split", action="store_true", help="also dump local and infinity parts")
    sub.add_parser("heat", parents=[common], help="dump the heat kernel profile")
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """引数とYAML設定から RunConfig を作る"""
    settings = load_defaults()
    if args.config:
        settings = merge_config(settings, load_defaults(args.config))
    quad = settings.get("quadrature", {})
    cli = settings.get("cli", {})
    conv = settings.get("convergence", {})

    n = args.n if args.n is not None else cli.get("n", 3)
    checks: List[str] = []
    skipped: Dict[str, str] = {}
    if getattr(args, "all", False):
        checks, skipped = _applicable_checks(n, args.z_im)
        for name, reason in skipped.items():
            logger.warning(f"Skipping check {name}: {reason}")
    elif getattr(args, "check", None):
        checks = list(args.check)

    run = RunConfig(
        command=args.command,
        n=n,
        z_re=args.z_re,
        z_im=args.z_im,
        R=args.R,
        R_grid=parse_R_grid(args.R_grid) if args.R_grid else None,
        p=args.p if args.p is not None else conv.get("p", 1.0),
        t=args.t if args.t is not None else conv.get("heat_time", 0.5),
        checks=checks,
        rel_tol=args.rel_tol if args.rel_tol is not None else quad.get("rel_tol", 1e-10),
        abs_tol=args.abs_tol if args.abs_tol is not None else quad.get("abs_tol", 1e-14),
        out=args.out,
        fmt=args.fmt or cli.get("format", "csv"),
        settings=settings,
        skipped=skipped,
    )
    return RunConfigValidator(CHECKS, REAL_ORDER_CHECKS, CHECK_MAX_DIMENSION).require_valid(run)


def configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def run_command(run: RunConfig, args: argparse.Namespace) -> ReportEnvelope:
    if run.command == "calibrate":
        return cmd_calibrate(run)
    if run.command == "verify":
        return cmd_verify(run)
    if run.command == "converge":
        return cmd_converge(run)
    if run.command == "kernel":
        return cmd_kernel(run, split=getattr(args, "split", False))
    return cmd_heat(run)


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLIのエントリポイント

    Returns
    -------
    int
        終了コード
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    if args.command == "verify" and args.list:
        print("\n".join(CHECKS))
        return 0

    try:
        run = build_run_config(args)
        envelope = run_command(run, args)
    except RieszError as exc:
        logger.error(str(exc))
        return exc.exit_code

    if run.out:
        envelope.write(run.out, run.fmt)
    else:
        sys.stdout.write(envelope.to_json())

    if envelope.passed:
        logger.info(f"{run.command}: all entries passed")
        return 0
    logger.error(f"{run.command}: failed entries {envelope.failures()}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
