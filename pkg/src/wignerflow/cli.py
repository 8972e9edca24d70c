"""Command-line surface: config parsing, field export, verification reports.

Subcommands:

    flow-field          sweep the currents, ∇·J and ∇·w over a grid; write a
                        CSV field (columns x,k,Jx,Jk,divJ,divW_mask,
                        liouvillianity, x-major order) plus a JSON summary
    camouflage-verify   three-way stationarity certificate + zero-mode
                        residual; exit 0 iff certified
    scan                one certificate + residual row per (ζ, γ) pair
    zero-mode           the pseudospectral residual alone

Configs are TOML.  Every report embeds the fully-resolved effective
configuration, and identical configs produce byte-identical CSV output
(17-significant-digit formatting, fixed row order).  A computation that
merely finds a nonzero divergence is still a success; only camouflage-verify
couples the exit status to certification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .camouflage import (
    CamouflageParams,
    SQUEEZE_BOUND,
    build_hamiltonian,
    grid_density_violation,
    replace_lambdas,
    simplified_params,
    solve_constraints,
    stationarity_certificate,
)
from .ensembles import GaussianEnsemble
from .flow import (
    TruncationPolicy,
    _liouvillianity_raw,
    _series_engine,
    is_masked,
)
from .grids import GridTooSmallError, PhaseSpaceGrid, zero_mode_residual
from .hamiltonian import CoshTerm, CosTerm, MonomialTerm, SeparableHamiltonian

_SCHEMA = {
    "camouflage": {
        "zeta",
        "gamma",
        "gamma1",
        "gamma2",
        "nu1",
        "nu2",
        "lambda1_override",
        "lambda2_override",
    },
    "hamiltonian": {"kinetic", "potential"},
    "ensemble": {"form", "alpha", "zeta"},
    "grid": {"x_min", "x_max", "k_min", "k_max", "nx", "nk"},
    "spectral": {"half_width", "n"},
    "truncation": {"eta_max", "term_rel_tol", "term_abs_tol"},
    "output": {"directory", "format"},
    "verification": {"divergence_tolerance", "residual_tolerance"},
    "scan": {"zeta", "gamma"},
}
_TERM_KEYS = {
    "cosh": {"kind", "amplitude", "frequency"},
    "cos": {"kind", "amplitude", "frequency"},
    "monomial": {"kind", "coefficient", "power"},
}


class ConfigError(ValueError):
    """Malformed or out-of-contract run configuration."""


@dataclass
class RunConfig:
    """Fully-resolved run configuration."""

    hamiltonian: SeparableHamiltonian
    ensemble: GaussianEnsemble
    camouflage: CamouflageParams | None
    grid: PhaseSpaceGrid
    spectral_grid: PhaseSpaceGrid
    policy: TruncationPolicy
    out_dir: Path
    field_format: str
    divergence_tolerance: float
    residual_tolerance: float
    scan_zetas: list | None
    scan_gammas: list | None
    effective: dict


def _check_unknown_keys(raw: dict):
    unknown = [key for key in raw if key not in _SCHEMA]
    for section, allowed in _SCHEMA.items():
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ConfigError(f"section [{section}] must be a table")
            unknown.extend(f"{section}.{key}" for key in raw[section] if key not in allowed)
    if unknown:
        raise ConfigError("unknown configuration keys: " + ", ".join(sorted(unknown)))


def _parse_term(entry: dict, where: str):
    kind = entry.get("kind")
    if kind not in _TERM_KEYS:
        raise ConfigError(f"{where}: term kind must be one of {sorted(_TERM_KEYS)}, got {kind!r}")
    unknown = set(entry) - _TERM_KEYS[kind]
    if unknown:
        raise ConfigError(f"{where}: unknown term keys {sorted(unknown)} for kind {kind!r}")
    try:
        if kind == "cosh":
            return CoshTerm(float(entry["amplitude"]), float(entry["frequency"]))
        if kind == "cos":
            return CosTerm(float(entry["amplitude"]), float(entry["frequency"]))
        return MonomialTerm(float(entry["coefficient"]), int(entry["power"]))
    except KeyError as exc:
        raise ConfigError(f"{where}: missing term key {exc}") from None


def _parse_grid(section: dict) -> PhaseSpaceGrid:
    defaults = PhaseSpaceGrid.default()
    return PhaseSpaceGrid(
        x_min=float(section.get("x_min", defaults.x_min)),
        x_max=float(section.get("x_max", defaults.x_max)),
        k_min=float(section.get("k_min", defaults.k_min)),
        k_max=float(section.get("k_max", defaults.k_max)),
        nx=int(section.get("nx", defaults.nx)),
        nk=int(section.get("nk", defaults.nk)),
    )


def _parse_camouflage(section: dict, grid: PhaseSpaceGrid, explicit_grid: bool):
    if "zeta" not in section:
        raise ConfigError("camouflage block requires zeta")
    zeta = float(section["zeta"])
    full_keys = {"gamma1", "gamma2", "nu1", "nu2"}
    has_full = any(key in section for key in full_keys)
    if has_full and "gamma" in section:
        raise ConfigError("camouflage block takes either gamma or the gamma1/gamma2/nu1/nu2 family")

    if abs(zeta) > SQUEEZE_BOUND and not explicit_grid:
        raise ConfigError(
            f"|zeta| = {abs(zeta):g} exceeds the resolvability bound {SQUEEZE_BOUND:g} "
            "for the default grid; supply an explicit [grid] (or --grid) that resolves it"
        )
    lift_bound = abs(zeta) > SQUEEZE_BOUND

    if has_full:
        missing = full_keys - set(section)
        if missing:
            raise ConfigError(f"camouflage full family requires {sorted(missing)}")
        params = solve_constraints(
            zeta,
            gamma1=float(section["gamma1"]),
            gamma2=float(section["gamma2"]),
            nu1=float(section["nu1"]),
            nu2=float(section["nu2"]),
            enforce_squeeze_bound=not lift_bound,
        )
    else:
        params = simplified_params(
            zeta,
            float(section.get("gamma", 1.0)),
            enforce_squeeze_bound=not lift_bound,
        )

    violation = grid_density_violation(params, grid)
    if violation is not None:
        raise ConfigError(violation)

    if "lambda1_override" in section or "lambda2_override" in section:
        params = replace_lambdas(
            params,
            lambda1=section.get("lambda1_override"),
            lambda2=section.get("lambda2_override"),
        )
    return params


def _term_dict(term) -> dict:
    if isinstance(term, CoshTerm):
        return {"kind": "cosh", "amplitude": term.amplitude, "frequency": term.frequency}
    if isinstance(term, CosTerm):
        return {"kind": "cos", "amplitude": term.amplitude, "frequency": term.frequency}
    return {"kind": "monomial", "coefficient": term.coefficient, "power": term.power}


def parse_config(
    text: str,
    *,
    grid_override: PhaseSpaceGrid | None = None,
    eta_max_override: int | None = None,
    out_override: str | None = None,
    format_override: str | None = None,
) -> RunConfig:
    """Validate a TOML document and resolve every default.

    Unknown keys are an error (listed by name); so are camouflage parameters
    the grid cannot resolve.  The returned config carries an `effective`
    dictionary that is echoed verbatim into every report.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    _check_unknown_keys(raw)

    if ("camouflage" in raw) == ("hamiltonian" in raw):
        raise ConfigError("exactly one of [camouflage] or [hamiltonian] is required")

    explicit_grid = "grid" in raw or grid_override is not None
    grid = grid_override if grid_override is not None else _parse_grid(raw.get("grid", {}))

    camouflage = None
    if "camouflage" in raw:
        camouflage = _parse_camouflage(raw["camouflage"], grid, explicit_grid)
        hamiltonian = build_hamiltonian(camouflage)
    else:
        section = raw["hamiltonian"]
        kinetic = [
            _parse_term(entry, f"hamiltonian.kinetic[{i}]")
            for i, entry in enumerate(section.get("kinetic", []))
        ]
        potential = [
            _parse_term(entry, f"hamiltonian.potential[{i}]")
            for i, entry in enumerate(section.get("potential", []))
        ]
        if not kinetic and not potential:
            raise ConfigError("hamiltonian block needs at least one term")
        hamiltonian = SeparableHamiltonian(tuple(kinetic), tuple(potential))

    ensemble_raw = raw.get("ensemble", {})
    form = ensemble_raw.get("form", "zeta" if camouflage is not None else "alpha")
    if form == "alpha":
        ensemble = GaussianEnsemble.isotropic(float(ensemble_raw.get("alpha", 1.0)))
    elif form == "zeta":
        default_zeta = camouflage.zeta if camouflage is not None else 0.0
        ensemble = GaussianEnsemble.squeezed(float(ensemble_raw.get("zeta", default_zeta)))
    else:
        raise ConfigError(f"ensemble form must be 'alpha' or 'zeta', got {form!r}")

    spectral_raw = raw.get("spectral", {})
    half_width = float(spectral_raw.get("half_width", 12.0))
    n_spectral = int(spectral_raw.get("n", 2048))
    spectral_grid = PhaseSpaceGrid(-half_width, half_width, -half_width, half_width, n_spectral, 16)

    trunc = raw.get("truncation", {})
    policy = TruncationPolicy(
        eta_max=int(eta_max_override if eta_max_override is not None else trunc.get("eta_max", 30)),
        term_rel_tol=float(trunc.get("term_rel_tol", 1e-14)),
        term_abs_tol=float(trunc.get("term_abs_tol", 1e-300)),
    )

    output = raw.get("output", {})
    out_dir = Path(out_override if out_override is not None else output.get("directory", "."))
    field_format = format_override if format_override is not None else output.get("format", "csv")
    if field_format not in ("csv", "json"):
        raise ConfigError(f"output format must be 'csv' or 'json', got {field_format!r}")

    verification = raw.get("verification", {})
    divergence_tolerance = float(verification.get("divergence_tolerance", 1e-10))
    residual_tolerance = float(verification.get("residual_tolerance", 1e-8))

    scan = raw.get("scan", {})
    scan_zetas = [float(z) for z in scan["zeta"]] if "zeta" in scan else None
    scan_gammas = [float(g) for g in scan["gamma"]] if "gamma" in scan else None
    if scan_zetas is not None and scan_gammas is not None:
        if len(scan_zetas) * len(scan_gammas) > 10_000:
            raise ConfigError("scan ranges exceed 10000 combinations")

    effective = {
        "hamiltonian": {
            "kinetic": [_term_dict(t) for t in hamiltonian.kinetic_terms],
            "potential": [_term_dict(t) for t in hamiltonian.potential_terms],
        },
        "ensemble": {"a": ensemble.a, "b": ensemble.b},
        "grid": {
            "x_min": grid.x_min,
            "x_max": grid.x_max,
            "k_min": grid.k_min,
            "k_max": grid.k_max,
            "nx": grid.nx,
            "nk": grid.nk,
        },
        "spectral": {"half_width": half_width, "n": n_spectral},
        "truncation": {
            "eta_max": policy.eta_max,
            "term_rel_tol": policy.term_rel_tol,
            "term_abs_tol": policy.term_abs_tol,
        },
        "output": {"directory": str(out_dir), "format": field_format},
        "verification": {
            "divergence_tolerance": divergence_tolerance,
            "residual_tolerance": residual_tolerance,
        },
    }
    if camouflage is not None:
        effective["camouflage"] = {
            "zeta": camouflage.zeta,
            "gamma1": camouflage.gamma1,
            "gamma2": camouflage.gamma2,
            "nu1": camouflage.nu1,
            "nu2": camouflage.nu2,
            "mu1": camouflage.mu1,
            "mu2": camouflage.mu2,
            "lambda1": camouflage.lambda1,
            "lambda2": camouflage.lambda2,
        }
    if scan_zetas is not None or scan_gammas is not None:
        effective["scan"] = {"zeta": scan_zetas, "gamma": scan_gammas}

    return RunConfig(
        hamiltonian=hamiltonian,
        ensemble=ensemble,
        camouflage=camouflage,
        grid=grid,
        spectral_grid=spectral_grid,
        policy=policy,
        out_dir=out_dir,
        field_format=field_format,
        divergence_tolerance=divergence_tolerance,
        residual_tolerance=residual_tolerance,
        scan_zetas=scan_zetas,
        scan_gammas=scan_gammas,
        effective=effective,
    )


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# flow-field
# ---------------------------------------------------------------------------

_FIELD_COLUMNS = ["x", "k", "Jx", "Jk", "divJ", "divW_mask", "liouvillianity"]


def cmd_flow_field(config: RunConfig) -> int:
    """Export current/divergence/Liouvillianity fields plus a JSON summary."""
    grid, W, H, policy = config.grid, config.ensemble, config.hamiltonian, config.policy
    X, K = grid.meshgrid()

    jx, diag_jx, ok_jx = _series_engine(W, H, X, K, policy, "current_x")
    jk, diag_jk, ok_jk = _series_engine(W, H, X, K, policy, "current_k")
    dx_val, diag_dx, ok_dx = _series_engine(W, H, X, K, policy, "div_jx")
    dk_val, diag_dk, ok_dk = _series_engine(W, H, X, K, policy, "div_jk")
    div = dx_val + dk_val
    mask = is_masked(W, X, K)
    liou, diag_liou = _liouvillianity_raw(W, H, X, K, policy)
    liou = np.where(mask, np.nan, liou)

    nonconverged = float(np.mean(~(ok_jx & ok_jk & ok_dx & ok_dk)))

    config.out_dir.mkdir(parents=True, exist_ok=True)
    field_path = config.out_dir / f"flow_field.{config.field_format}"
    xs, ks = grid.x_axis(), grid.k_axis()
    if config.field_format == "csv":
        with open(field_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(_FIELD_COLUMNS) + "\n")
            for i in range(grid.nx):
                for j in range(grid.nk):
                    fh.write(
                        ",".join(
                            (
                                _fmt(xs[i]),
                                _fmt(ks[j]),
                                _fmt(jx[i, j]),
                                _fmt(jk[i, j]),
                                _fmt(div[i, j]),
                                str(int(mask[i, j])),
                                _fmt(liou[i, j]),
                            )
                        )
                        + "\n"
                    )
    else:
        rows = [
            [
                xs[i],
                ks[j],
                jx[i, j],
                jk[i, j],
                div[i, j],
                int(mask[i, j]),
                None if mask[i, j] else liou[i, j],
            ]
            for i in range(grid.nx)
            for j in range(grid.nk)
        ]
        _write_json(field_path, {"columns": _FIELD_COLUMNS, "rows": rows})

    unmasked = ~mask
    summary = {
        "command": "flow-field",
        "max_abs_jx": float(np.max(np.abs(jx))),
        "max_abs_jk": float(np.max(np.abs(jk))),
        "max_abs_div_j": float(np.max(np.abs(div))),
        "max_abs_liouvillianity": float(np.max(np.abs(liou[unmasked]))) if unmasked.any() else 0.0,
        "masked_fraction": float(np.mean(mask)),
        "series_terms_used": max(d.terms_used for d in (diag_jx, diag_jk, diag_dx, diag_dk)),
        "series_converged": all(d.converged for d in (diag_jx, diag_jk, diag_dx, diag_dk)),
        "liouvillianity_terms_used": diag_liou.terms_used,
        "nonconverged_fraction": nonconverged,
        "field_file": field_path.name,
        "effective_config": config.effective,
    }
    _write_json(config.out_dir / "flow_summary.json", summary)
    print(f"wrote {field_path} and flow_summary.json (max |divJ| = {summary['max_abs_div_j']:.3e})")
    return 0 if nonconverged <= 0.01 else 2


# ---------------------------------------------------------------------------
# camouflage-verify / zero-mode
# ---------------------------------------------------------------------------


def _require_camouflage(config: RunConfig):
    if config.camouflage is None:
        raise ConfigError("this command requires a [camouflage] parameter block")
    return config.camouflage


def _zero_mode_entry(config: RunConfig, params: CamouflageParams) -> dict:
    """Residual plus surfaced warnings/errors, never an exception."""
    entry = {"zero_mode_residual": None, "warnings": [], "error": None}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            entry["zero_mode_residual"] = zero_mode_residual(params, config.spectral_grid)
        entry["warnings"] = sorted({str(w.message) for w in caught})
    except (GridTooSmallError, ValueError) as exc:
        entry["error"] = str(exc)
    return entry


def cmd_camouflage_verify(config: RunConfig) -> int:
    """Certificate + zero-mode residual; exit 0 iff both verify."""
    params = _require_camouflage(config)
    certificate = stationarity_certificate(
        params, config.grid, config.policy, tolerance=config.divergence_tolerance
    )
    zero_mode = _zero_mode_entry(config, params)
    residual = zero_mode["zero_mode_residual"]
    passed = bool(
        certificate.certified
        and residual is not None
        and residual <= config.residual_tolerance
    )

    report = {"command": "camouflage-verify", "passed": passed}
    report.update(certificate.to_dict())
    report.update(zero_mode)
    report["residual_tolerance"] = config.residual_tolerance
    report["effective_config"] = config.effective

    config.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(config.out_dir / "camouflage_verify.json", report)
    status = "certified" if passed else "denied"
    print(
        f"camouflage {status}: max divergence {certificate.series_max:.3e} "
        f"(argmax at x={certificate.series_argmax[0]:.3g}, k={certificate.series_argmax[1]:.3g}), "
        f"zero-mode residual {residual if residual is not None else 'n/a'}"
    )
    return 0 if passed else 1


def cmd_zero_mode(config: RunConfig) -> int:
    """Pseudospectral zero-mode residual alone."""
    params = _require_camouflage(config)
    entry = _zero_mode_entry(config, params)
    residual = entry["zero_mode_residual"]
    passed = residual is not None and residual <= config.residual_tolerance
    report = {
        "command": "zero-mode",
        "passed": bool(passed),
        "residual_tolerance": config.residual_tolerance,
        "effective_config": config.effective,
    }
    report.update(entry)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(config.out_dir / "zero_mode.json", report)
    print(f"zero-mode residual: {residual if residual is not None else entry['error']}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

_SCAN_COLUMNS = [
    "zeta",
    "gamma",
    "status",
    "certified",
    "bracket_max",
    "closed_form_max",
    "series_max",
    "matched_classical_max",
    "zero_mode_residual",
    "series_terms_used",
    "series_converged",
]


def cmd_scan(config: RunConfig) -> int:
    """One certificate + residual row per (ζ, γ); failures stay in-row."""
    if config.scan_zetas is None or config.scan_gammas is None:
        raise ConfigError("scan requires [scan] zeta and gamma lists")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    path = config.out_dir / "scan.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(_SCAN_COLUMNS) + "\n")
        for zeta in config.scan_zetas:
            for gamma in config.scan_gammas:
                row = {"zeta": _fmt(zeta), "gamma": _fmt(gamma)}
                try:
                    params = simplified_params(zeta, gamma)
                    violation = grid_density_violation(params, config.grid)
                    if violation is not None:
                        raise ValueError(violation)
                    certificate = stationarity_certificate(
                        params, config.grid, config.policy, config.divergence_tolerance
                    )
                    zm = _zero_mode_entry(config, params)
                    residual = zm["zero_mode_residual"]
                    row.update(
                        status="ok" if zm["error"] is None else f"error: {zm['error']}",
                        certified=str(
                            bool(
                                certificate.certified
                                and residual is not None
                                and residual <= config.residual_tolerance
                            )
                        ).lower(),
                        bracket_max=_fmt(certificate.bracket_max),
                        closed_form_max=_fmt(certificate.closed_form_max),
                        series_max=_fmt(certificate.series_max),
                        matched_classical_max=_fmt(certificate.matched_classical_max),
                        zero_mode_residual=_fmt(residual) if residual is not None else "nan",
                        series_terms_used=str(certificate.series_terms_used),
                        series_converged=str(certificate.series_converged).lower(),
                    )
                except (ValueError, ConfigError) as exc:
                    row.update(
                        status=f"refused: {exc}",
                        certified="false",
                        bracket_max="nan",
                        closed_form_max="nan",
                        series_max="nan",
                        matched_classical_max="nan",
                        zero_mode_residual="nan",
                        series_terms_used="0",
                        series_converged="false",
                    )
                fh.write(",".join(_csv_quote(row[c]) for c in _SCAN_COLUMNS) + "\n")
    print(f"wrote {path}")
    return 0


def _csv_quote(cell: str) -> str:
    if "," in cell or '"' in cell:
        return '"' + cell.replace('"', '""') + '"'
    return cell


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parse_grid_flag(text: str) -> PhaseSpaceGrid:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("--grid expects nx,nk,xmax,kmax")
    nx, nk = int(parts[0]), int(parts[1])
    xmax, kmax = float(parts[2]), float(parts[3])
    return PhaseSpaceGrid(-xmax, xmax, -kmax, kmax, nx, nk)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wignerflow",
        description="Phase-space Wigner flow engine for separable Hamiltonians",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("flow-field", "export current/divergence/Liouvillianity fields"),
        ("camouflage-verify", "three-way stationarity certificate + zero mode"),
        ("scan", "certificate grid over (zeta, gamma) ranges"),
        ("zero-mode", "pseudospectral zero-mode residual"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="TOML configuration file")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument(
            "--grid", type=_parse_grid_flag, default=None, help="nx,nk,xmax,kmax override"
        )
        cmd.add_argument("--eta-max", type=int, default=None, help="series truncation override")
        cmd.add_argument("--format", choices=("csv", "json"), default=None)
    return parser


_COMMANDS = {
    "flow-field": cmd_flow_field,
    "camouflage-verify": cmd_camouflage_verify,
    "scan": cmd_scan,
    "zero-mode": cmd_zero_mode,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        config = parse_config(
            text,
            grid_override=args.grid,
            eta_max_override=args.eta_max,
            out_override=args.out,
            format_override=args.format,
        )
        return _COMMANDS[args.command](config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
