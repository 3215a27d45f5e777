"""Command-line front end.

Subcommands:
  ccdf            run a Monte-Carlo CCDF experiment, write <out>.csv + <out>.json
  analyze-perm    report the pairwise mu metric of a permutation set
  analyze-pss     write full/punctured cross-correlation spectra of a PSS pair
  verify-var-rho  tabulate analytic vs empirical variance of rho(m)

Flag-to-parameter mapping: --n-fft = total subcarriers, --group-size =
subcarriers per group, --active = active subcarriers per group,
--mod-order = constellation order.

Exit codes: 0 success, 2 invalid configuration or malformed input,
3 unwritable output path. All randomized outputs are fully determined by
--seed; --workers never changes results.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .analysis import (
    mu_metric,
    punctured_spectrum,
    spectrum_bound,
    var_rho_closed_form,
    var_rho_empirical_profile,
)
from .ccdf import (
    CcdfCurve,
    SchemeDescriptor,
    TrialPlan,
    curve_csv_text,
    format_sig9,
    instantiate_scheme,
    plan_json_doc,
    run_ccdf,
)
from .core import GroupSap, Sap, SystemConfig, sample_random_sap
from .slm import (
    gen_hadamard_pss,
    gen_perm_set,
    gen_random_pss,
    perm_set_from_json,
    pss_from_json,
)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _add_config_args(p: argparse.ArgumentParser, active_default=None):
    p.add_argument("--n-fft", type=int, default=64, help="total subcarriers (power of two)")
    p.add_argument("--group-size", type=int, default=16, help="subcarriers per group")
    p.add_argument("--active", type=int, default=active_default, help="active subcarriers per group")
    p.add_argument("--mod-order", type=int, default=4, help="constellation order")


def _build_cfg(args) -> SystemConfig:
    try:
        return SystemConfig(
            n_fft=args.n_fft,
            group_size=args.group_size,
            active=args.active,
            mod_order=args.mod_order,
        )
    except (TypeError, ValueError) as e:
        raise CliError(2, f"invalid configuration: {e}")


def _parse_gamma(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 9)
    except ValueError:
        raise CliError(2, f"bad gamma spec {spec!r}, expected start:stop:step")


def _read_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise CliError(2, f"cannot read {path}: {e}")


def _write_text(path: str, text: str):
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise CliError(3, f"cannot write {path}: {e}")


def _check_writable(path: str):
    try:
        with open(path, "a"):
            pass
    except OSError as e:
        raise CliError(3, f"cannot write {path}: {e}")


def _load_sap(path: str, cfg: SystemConfig) -> Sap:
    doc = _read_json(path)
    try:
        return Sap(tuple(GroupSap(tuple(rows)) for rows in doc["groups"])).check(cfg)
    except (KeyError, TypeError, ValueError) as e:
        raise CliError(2, f"malformed SAP file {path}: {e}")


# ---------------------------------------------------------------------------
# ccdf

def cmd_ccdf(args) -> int:
    cfg = _build_cfg(args)
    pinned_pss = pinned_perms = None
    if args.scheme == "original":
        if args.u is not None or args.pss is not None or args.perm is not None:
            raise CliError(2, "--u/--pss/--perm are not accepted with --scheme original")
        scheme = SchemeDescriptor.original(sap_source=args.sap_source)
    else:
        u = 4 if args.u is None else args.u
        pss_arg = args.pss or "random"
        perm_arg = args.perm or "identity"
        if pss_arg in ("random", "hadamard", "cyclic-hadamard"):
            pss_kind = "cyclic-hadamard" if pss_arg != "random" else "random"
        else:
            pss_kind = "pinned"
            try:
                pinned_pss = pss_from_json(_read_json(pss_arg))
            except ValueError as e:
                raise CliError(2, f"malformed PSS file {pss_arg}: {e}")
        if perm_arg in ("identity", "random"):
            perm_kind = perm_arg
        else:
            perm_kind = "pinned"
            try:
                pinned_perms = perm_set_from_json(_read_json(perm_arg), cfg)
            except (KeyError, ValueError) as e:
                raise CliError(2, f"malformed permutation file {perm_arg}: {e}")
        try:
            scheme = SchemeDescriptor(
                mode="slm",
                u=u,
                pss_kind=pss_kind,
                perm_kind=perm_kind,
                sap_source=args.sap_source,
                pss_alphabet=args.pss_alphabet,
                pinned_pss=pinned_pss,
                pinned_perms=pinned_perms,
            )
        except ValueError as e:
            raise CliError(2, f"invalid scheme: {e}")
    try:
        plan = TrialPlan(
            cfg=cfg,
            scheme=scheme,
            trials=args.trials,
            seed=args.seed,
            gamma_db=_parse_gamma(args.gamma),
            oversample=args.oversample,
        )
    except ValueError as e:
        raise CliError(2, f"invalid plan: {e}")

    base = args.out[:-4] if args.out.endswith(".csv") else args.out
    csv_path, json_path = base + ".csv", base + ".json"
    _check_writable(csv_path)
    _check_writable(json_path)

    curve = run_ccdf(plan, workers=args.workers)
    pss, perms = instantiate_scheme(plan)
    _write_text(csv_path, curve_csv_text(curve))
    _write_text(json_path, json.dumps(plan_json_doc(plan, pss, perms), indent=2, sort_keys=True) + "\n")
    print(f"wrote {csv_path} and {json_path} ({plan.trials} trials)")
    return 0


# ---------------------------------------------------------------------------
# analyze-perm

def cmd_analyze_perm(args) -> int:
    cfg = _build_cfg(args)
    if args.perm_file:
        try:
            perms = perm_set_from_json(_read_json(args.perm_file), cfg)
        except (KeyError, TypeError, ValueError) as e:
            raise CliError(2, f"malformed permutation file {args.perm_file}: {e}")
    else:
        rng = np.random.default_rng(args.seed)
        try:
            perms = gen_perm_set(cfg, args.u, args.kind, rng)
        except ValueError as e:
            raise CliError(2, str(e))
    if perms.u < 2:
        raise CliError(2, "need at least two permutations to form a pair")

    pairs = []
    for u in range(perms.u):
        for v in range(u + 1, perms.u):
            report = mu_metric(perms.perms[u], perms.perms[v], cfg, pair=(u, v))
            pairs.append(report)
            print(f"pair ({u},{v}): mu = {format_sig9(report.mu)}")
    aggregate = float(np.mean([r.mu for r in pairs]))
    print(f"aggregate mu = {format_sig9(aggregate)}")

    if args.out:
        doc = {
            "n_fft": cfg.n_fft,
            "num_groups": cfg.num_groups,
            "u": perms.u,
            "kind": perms.kind,
            "pairs": [{"u": r.pair[0], "v": r.pair[1], "mu": r.mu} for r in pairs],
            "aggregate_mu": aggregate,
        }
        _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# analyze-pss

def cmd_analyze_pss(args) -> int:
    cfg = _build_cfg(args)
    rng = np.random.default_rng(args.seed)
    if args.pss_file:
        try:
            pss = pss_from_json(_read_json(args.pss_file))
        except (KeyError, ValueError) as e:
            raise CliError(2, f"malformed PSS file {args.pss_file}: {e}")
    elif args.pss == "hadamard":
        pss = gen_hadamard_pss(cfg, args.u)
    else:
        pss = gen_random_pss(cfg, args.u, rng, alphabet=args.pss_alphabet)
    if pss.n_fft != cfg.n_fft:
        raise CliError(2, f"PSS length {pss.n_fft} does not match n_fft {cfg.n_fft}")
    u, v = args.pair
    if not (0 <= u < pss.u and 0 <= v < pss.u and u != v):
        raise CliError(2, f"bad pair ({u},{v}) for a set of {pss.u} sequences")

    sap = _load_sap(args.sap_file, cfg) if args.sap_file else sample_random_sap(cfg, rng)
    full = punctured_spectrum(pss.sequences[u], pss.sequences[v])
    punct = punctured_spectrum(pss.sequences[u], pss.sequences[v], sap)
    lines = [
        f"# c={format_sig9(full.c)}",
        f"# bound={format_sig9(spectrum_bound(cfg, full.c))}",
        "m,full,punctured",
    ]
    for m in range(cfg.n_fft):
        lines.append(f"{m},{format_sig9(full.magnitudes[m])},{format_sig9(punct.magnitudes[m])}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out} (c = {format_sig9(full.c)})")
    return 0


# ---------------------------------------------------------------------------
# verify-var-rho

def cmd_verify_var_rho(args) -> int:
    cfg = _build_cfg(args)
    rng = np.random.default_rng(args.seed)
    empirical = var_rho_empirical_profile(cfg, args.trials, rng)
    if args.m_values:
        try:
            m_list = [int(v) for v in args.m_values.split(",")]
        except ValueError:
            raise CliError(2, f"bad --m-values {args.m_values!r}")
        if any(not 0 <= m < cfg.n_fft for m in m_list):
            raise CliError(2, "--m-values out of range")
    else:
        m_list = list(range(cfg.n_fft))

    lines = ["m,analytic,empirical,rel_error"]
    for m in m_list:
        analytic = var_rho_closed_form(cfg, m)
        emp = float(empirical[m])
        rel = format_sig9(abs(emp - analytic) / analytic) if analytic > 0 else ""
        lines.append(f"{m},{format_sig9(analytic)},{format_sig9(emp)},{rel}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ofdm-im-slm", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"ofdm-im-slm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ccdf", help="run a Monte-Carlo CCDF experiment")
    _add_config_args(p, active_default=2)
    p.add_argument("--scheme", choices=("original", "slm"), default="slm")
    p.add_argument("--u", type=int, default=None, help="SLM branches (default 4)")
    p.add_argument("--pss", default=None, help="random, hadamard, or a PSS JSON file")
    p.add_argument("--perm", default=None, help="identity, random, or a permutation JSON file")
    p.add_argument("--pss-alphabet", choices=("binary", "quaternary", "continuous"), default="quaternary")
    p.add_argument("--sap-source", choices=("uniform", "bits"), default="uniform")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--gamma", default="4:13:0.1", help="gamma grid start:stop:step in dB")
    p.add_argument("--oversample", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output base path; writes <out>.csv and <out>.json")
    p.set_defaults(func=cmd_ccdf)

    p = sub.add_parser("analyze-perm", help="mu metric of a permutation set")
    _add_config_args(p, active_default=1)
    p.add_argument("--perm-file", default=None, help="permutation set JSON file")
    p.add_argument("--kind", choices=("identity", "random"), default="random")
    p.add_argument("--u", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.set_defaults(func=cmd_analyze_perm)

    p = sub.add_parser("analyze-pss", help="cross-correlation spectra of a PSS pair")
    _add_config_args(p, active_default=2)
    p.add_argument("--pss-file", default=None, help="PSS JSON file")
    p.add_argument("--pss", choices=("random", "hadamard"), default="random")
    p.add_argument("--pss-alphabet", choices=("binary", "quaternary", "continuous"), default="quaternary")
    p.add_argument("--u", type=int, default=2)
    p.add_argument("--pair", type=int, nargs=2, default=(0, 1), metavar=("U", "V"))
    p.add_argument("--sap-file", default=None, help="SAP JSON file (default: random SAP from --seed)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze_pss)

    p = sub.add_parser("verify-var-rho", help="analytic vs empirical variance of rho(m)")
    _add_config_args(p, active_default=2)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--m-values", default=None, help="comma-separated lags (default: all)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify_var_rho)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
