"""Command-line front end: keyrate, figure, sweep, and oracle subcommands.

Exit codes: 0 success, 1 suite failure, 2 configuration error. Output CSVs
carry the effective configuration in '#'-prefixed comment lines and use
shortest round-trip decimal formatting.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .keyrate import (
    max_distance_detection_scheme,
    optimize_k_detection_scheme,
    secret_key_rate,
    sweep_asymmetric,
    sweep_symmetric,
)
from .oracle import run_oracle_suites

IDEAL_V = 1e5  # modulation variance used for "ideal" comparison curves


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, cfg: RunConfig, header: list[str], rows: list[tuple]) -> None:
    lines = [f"# {line}" for line in cfg.effective_lines()]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(cfg: RunConfig) -> np.ndarray:
    sw = cfg["sweep"]
    return np.linspace(sw["l_min_km"], sw["l_max_km"], sw["points"])


def cmd_keyrate(cfg: RunConfig, out: str | None) -> int:
    point = secret_key_rate(cfg.scenario())
    status = "positive" if point.positive else "nonpositive"
    print(f"K={point.k!r} I_AB={point.i_ab!r} chi_BE={point.chi_be!r} "
          f"g={point.g_used!r} gain={point.gain_provenance} status={status}")
    if out:
        _write_csv(out, cfg, ["K_bits_per_use", "I_AB_bits", "chi_BE_bits", "g", "status"],
                   [(point.k, point.i_ab, point.chi_be, point.g_used, status)])
    return 0


def _sweep_rows(result) -> list[tuple]:
    rows = []
    for curve in result.curves:
        for axis, point in zip(curve.axis_km, curve.points):
            rows.append((float(axis), point.k, curve.label))
        rows.append((curve.max_distance_km, "", f"{curve.label}:max_distance"))
    return rows


def cmd_figure(cfg: RunConfig, figure: str, out: str | None, threads: int) -> int:
    scenario = cfg.scenario()
    if figure == "fig4":
        legs = _grid(cfg) / 2.0
        rows = []
        for label, scn in (
            ("practical", scenario),
            ("ideal", _idealized(scenario)),
        ):
            rows.extend(_sweep_rows(sweep_symmetric(scn, legs, threads)))
            rows[-1] = (rows[-1][0], rows[-1][1], f"{label}:max_total_distance")
            # relabel curve rows emitted above
            rows = [(a, k, lab.replace("symmetric", label)) for a, k, lab in rows]
        _write_csv(out, cfg, ["axis_km", "K_bits_per_use", "curve_label"], rows)
        return 0
    if figure == "fig5b":
        rows = []
        for label, scn in (
            ("practical", scenario),
            ("ideal", _idealized(scenario)),
        ):
            res = sweep_asymmetric(scn, _grid(cfg), cfg.l_bc_values(), threads)
            for a, k, lab in _sweep_rows(res):
                rows.append((a, k, f"{label}:{lab}"))
        _write_csv(out, cfg, ["axis_km", "K_bits_per_use", "curve_label"], rows)
        return 0
    if figure == "fig6":
        rows = []
        for beta in (1.0, 0.95):
            from dataclasses import replace
            scn = replace(scenario, beta_r=beta)
            label = f"beta={beta:g}"
            for l_ab in _grid(cfg):
                s = scn.with_lengths(l_ab, 0.0)
                k_opt, k_max = optimize_k_detection_scheme(s)
                rows.append((float(l_ab), k_max, label, k_opt))
            endpoint = max_distance_detection_scheme(scn.with_lengths(0.0, 0.0))
            rows.append((endpoint, "", f"{label}:max_distance", ""))
        _write_csv(out, cfg, ["axis_km", "K_bits_per_use", "curve_label", "k_opt"], rows)
        return 0
    raise ConfigError(f"unknown figure id {figure!r}")


def _idealized(scenario):
    from dataclasses import replace
    return replace(
        scenario,
        v_a=IDEAL_V, v_b=IDEAL_V,
        channel_a=replace(scenario.channel_a, excess_noise=0.0),
        channel_b=replace(scenario.channel_b, excess_noise=0.0),
    )


def cmd_sweep(cfg: RunConfig, mode: str, out: str | None, threads: int) -> int:
    scenario = cfg.scenario()
    if mode == "symmetric":
        result = sweep_symmetric(scenario, _grid(cfg) / 2.0, threads)
    elif mode == "asymmetric":
        result = sweep_asymmetric(scenario, _grid(cfg), cfg.l_bc_values(), threads)
    else:
        raise ConfigError(f"unknown sweep mode {mode!r}")
    _write_csv(out, cfg, ["axis_km", "K_bits_per_use", "curve_label"], _sweep_rows(result))
    return 0


def cmd_oracle(cfg: RunConfig, negative_control: bool) -> int:
    n = cfg["mc"]["n"]
    seed = cfg["mc"]["seed"]
    results = run_oracle_suites(cfg.scenario(), n, seed, wrong_sign=negative_control)
    ok = True
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.detail}) seed={seed} n={n}")
        ok = ok and r.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvmdi",
        description="Security analysis of relay-based continuous-variable QKD",
    )
    parser.add_argument("--config", metavar="PATH", help="config file (INI-style sections)")
    parser.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                        help="override a config entry (repeatable)")
    parser.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed (overrides mc.seed)")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep workers")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("keyrate", help="single key-rate evaluation")
    fig = sub.add_parser("figure", help="emit data for a reference figure")
    fig.add_argument("figure_id", choices=["fig4", "fig5b", "fig6"])
    swp = sub.add_parser("sweep", help="generic distance sweep")
    swp.add_argument("mode", choices=["symmetric", "asymmetric"])
    orc = sub.add_parser("oracle", help="run the Monte Carlo verification suites")
    orc.add_argument("--negative-control", action="store_true",
                     help="test hook: inject a wrong-sign displacement (suite must fail)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"mc.seed={args.seed}")
        cfg = load_config(args.config, overrides)
        if args.command == "keyrate":
            return cmd_keyrate(cfg, args.out)
        if args.command == "figure":
            return cmd_figure(cfg, args.figure_id, args.out, args.threads)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.mode, args.out, args.threads)
        if args.command == "oracle":
            return cmd_oracle(cfg, args.negative_control)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
