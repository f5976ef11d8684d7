"""Config-driven batch runner.

Usage: zcover SUBCOMMAND CONFIG [--seed N] [--mode float|exact] [--out-dir DIR]

The config is plain text: `[section]` headers and `key = value` lines.
Every run writes `<subcommand>.csv` and `<subcommand>.json` (and a
gnuplot script `<subcommand>.plt` where a plot makes sense) into the
output directory.  With a fixed seed and config the CSV and plot files
are reproduced byte-for-byte; the JSON differs only in runtime_ms.

Exit codes: 2 for config errors (with a line/field diagnostic), 3 for
numeric-mode violations.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fuchsian, iet, psl2, suspension, traintrack

EXIT_CONFIG = 2
EXIT_MODE = 3


class ConfigError(Exception):
    pass


class ModeViolation(Exception):
    pass


def parse_config(text: str) -> dict:
    """Sections of key=value pairs; values kept as strings."""
    out = {}
    section = ""
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        out.setdefault(section, {})[key] = (value.strip(), ln)
    return out


class Config:
    def __init__(self, sections: dict, mode: str, seed: int):
        self.sections = sections
        self.mode = mode
        self.seed = seed
        self.rng = random.Random(seed)

    def raw(self, section: str, key: str, default=None):
        entry = self.sections.get(section, {}).get(key)
        if entry is None:
            if default is not None:
                return default, None
            raise ConfigError(f"missing field {section}.{key}")
        return entry

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def number(self, section: str, key: str, default=None) -> float:
        value, ln = self.raw(section, key, default)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"line {ln}: field {section}.{key}: not a number: {value!r}")

    def integer(self, section: str, key: str, default=None) -> int:
        value, ln = self.raw(section, key, default)
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"line {ln}: field {section}.{key}: not an integer: {value!r}")

    def boolean(self, section: str, key: str, default="false") -> bool:
        value, ln = self.raw(section, key, default)
        low = str(value).lower()
        if low not in ("true", "false"):
            raise ConfigError(f"line {ln}: field {section}.{key}: expected true/false")
        return low == "true"

    def grid(self, section: str, key: str, default=None) -> list:
        """Comma list `a,b,c` or range `start:stop:step` (stop inclusive)."""
        value, ln = self.raw(section, key, default)
        try:
            if ":" in value:
                start, stop, step = (float(v) for v in value.split(":"))
                n = int(math.floor((stop - start) / step + 1e-9)) + 1
                return [start + k * step for k in range(n)]
            return [float(v) for v in value.split(",")]
        except ValueError:
            raise ConfigError(f"line {ln}: field {section}.{key}: bad grid: {value!r}")

    def iet_input(self, key: str = "iet") -> iet.IET:
        value, ln = self.raw("inputs", key)
        try:
            T = iet.parse_iet_record(value)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"line {ln}: field inputs.{key}: {e}")
        if self.mode == "exact":
            if not T.exact:
                raise ModeViolation(
                    f"inputs.{key}: exact mode requires num/den lengths"
                )
            return T
        if T.exact:
            T = iet.IET(tuple(float(l) for l in T.lengths), T.permutation)
        return T

    def roof(self):
        value, ln = self.raw("inputs", "roof", "1")
        if self.mode == "exact":
            if "." in value:
                raise ModeViolation("inputs.roof: exact mode requires an integer or num/den roof")
            try:
                return Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"line {ln}: field inputs.roof: bad length {value!r}")
        try:
            return float(iet.parse_length(value))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"line {ln}: field inputs.roof: bad length {value!r}")

    def point(self, key: str, default=None) -> float:
        value, ln = self.raw("inputs", key, default)
        if value == "random":
            return self.rng.random()
        try:
            v = iet.parse_length(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"line {ln}: field inputs.{key}: bad value {value!r}")
        if self.mode == "exact" and isinstance(v, Fraction):
            return v
        return float(v)

    def frame(self, key: str, group) -> psl2.GroupElement:
        """`matrix a b c d`, `axis LABEL`, or `axis-inv LABEL`."""
        value, ln = self.raw("inputs", key)
        parts = value.split()
        try:
            if parts[0] == "matrix" and len(parts) == 5:
                return psl2.make_element(*(float(v) for v in parts[1:]))
            if parts[0] in ("axis", "axis-inv") and len(parts) == 2:
                frame = psl2.axis_frame(group.matrix_of(parts[1]))
                return frame.inv() if parts[0] == "axis-inv" else frame
        except (ValueError, KeyError, psl2.SingularMatrix) as e:
            raise ConfigError(f"line {ln}: field inputs.{key}: {e}")
        raise ConfigError(
            f"line {ln}: field inputs.{key}: expected 'matrix a b c d' or 'axis[-inv] LABEL'"
        )

    def echo(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            **{
                sec: {k: v for k, (v, _) in kv.items()}
                for sec, kv in self.sections.items()
            },
        }


def g17(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n")


def write_plot(path: Path, csv_name: str, title: str, using: str, style: str = "lines") -> None:
    script = "\n".join(
        [
            "set datafile separator ','",
            f"set title '{title}'",
            "set key off",
            f"plot '{csv_name}' every ::1 using {using} with {style}",
        ]
    )
    path.write_text(script + "\n")


# --- subcommand implementations; each returns (csv_header, rows, metrics, flags, plot) ---


def run_iet_orbit(cfg: Config):
    T = cfg.iet_input()
    n = cfg.integer("params", "steps", "100")
    x0 = cfg.point("x0", "0")
    orbit = T.orbit(x0, n)
    rows = [f"{k},{g17(x)}" for k, x in enumerate(orbit)]
    metrics = {"steps": n, "x_final": float(orbit[-1]), "total": float(T.total)}
    return "n,x", rows, metrics, [], ("1:2", "points")


def run_keane(cfg: Config):
    T = cfg.iet_input()
    depth = cfg.integer("params", "depth", "10000")
    certify = cfg.boolean("params", "certify", "false")
    if certify and cfg.mode != "exact":
        raise ModeViolation("params.certify: collision certification requires exact mode")
    verdict = iet.keane_check(T, depth)
    rows = [f"{verdict.status},{verdict.n},{verdict.i},{verdict.j}"]
    metrics = {"depth": depth, "n": verdict.n, "i": verdict.i, "j": verdict.j}
    flags = [verdict.status] + (["certified"] if certify and not verdict else [])
    return "status,n,i,j", rows, metrics, flags, None


def run_weakmix(cfg: Config):
    T = cfg.iet_input()
    N = cfg.integer("params", "N", "100000")
    M = cfg.integer("params", "grid", "0")
    x0 = cfg.point("x0", "0")
    thetas = iet.uniform_theta_grid(M) if M else np.array(cfg.grid("params", "theta"))
    S, s_max = iet.weak_mix_statistic(T, thetas, N, x0)
    rows = [f"{g17(th)},{g17(s)}" for th, s in zip(thetas, S)]
    metrics = {
        "N": N,
        "S_max": s_max,
        "theta_argmax": float(thetas[int(np.argmax(S))]),
    }
    return "theta,S", rows, metrics, [], ("1:2",)


def run_suspend(cfg: Config, out_dir: Path):
    T = cfg.iet_input()
    surf = suspension.suspend(T, cfg.roof())
    rows = [
        f"{c.side},{g17(c.position)},{c.angle_turns}"
        for c in surf.cone_points + surf.marked_points
    ]
    metrics = {
        "genus": surf.genus,
        "cone_points": len(surf.cone_points),
        "marked_points": len(surf.marked_points),
    }
    dump = [f"roof {iet.format_length(surf.roof)}", iet.format_iet_record(T), "genus %d" % surf.genus]
    for c in surf.cone_points:
        dump.append(f"cone {c.side} {iet.format_length(c.position)} {c.angle_turns}")
    (out_dir / "suspend.txt").write_text("\n".join(dump) + "\n")
    return "side,position,angle_turns", rows, metrics, [], None


def run_flow(cfg: Config):
    T = cfg.iet_input()
    surf = suspension.suspend(T, cfg.roof())
    theta = cfg.number("params", "theta", "0")
    total = cfg.number("params", "time")
    steps = cfg.integer("params", "steps", "50")
    y0 = cfg.point("y0", "0")
    x0 = cfg.point("x0", "0")
    start = surf.point(x0, y0)
    rows = []
    flags = []
    for k in range(steps + 1):
        t = total * k / steps
        if surf.exact:
            t = Fraction(t).limit_denominator(10**12)
        try:
            p = suspension.straight_flow(surf, start, theta, t)
        except suspension.SingularityHit as hit:
            flags.append(f"singularity at t={g17(hit.time)}")
            break
        rows.append(f"{g17(t)},{p.sheet},{g17(p.x)},{g17(p.y)}")
    metrics = {"theta": theta, "time": total, "samples": len(rows)}
    return "t,sheet,x,y", rows, metrics, flags, ("3:4",)


def run_beta(cfg: Config):
    T = cfg.iet_input()
    surf = suspension.suspend(T, cfg.roof())
    thetas = cfg.grid("params", "theta", "0")
    depth = cfg.integer("params", "leaf_depth", "10000")
    y0 = cfg.point("y0")
    x0 = cfg.point("x0", "0")
    rows = []
    for th in thetas:
        ray = suspension.FlatRay(surf.point(x0, y0), th)
        plus = suspension.beta_plus_flat(surf, ray, depth)
        minus = suspension.beta_minus_flat(surf, ray, depth)
        rows.append(
            f"{g17(th)},{g17(plus.value)},{g17(plus.decay_rate)},{g17(minus.value)},{g17(minus.decay_rate)}"
        )
    metrics = {"rays": len(rows), "leaf_depth": depth}
    return "theta,beta_plus,rate_plus,beta_minus,rate_minus", rows, metrics, [], None


def _track_input(cfg: Config):
    kind, ln = cfg.raw("inputs", "track", "permutation")
    if kind == "permutation":
        return traintrack.track_from_permutation(cfg.iet_input())[0]
    if kind == "figure-eight":
        return traintrack.figure_eight_track()
    if kind == "single-loop":
        return traintrack.single_loop_track(cfg.number("inputs", "loop_length", "1"))
    raise ConfigError(f"line {ln}: field inputs.track: unknown kind {kind!r}")


def run_track(cfg: Config, out_dir: Path):
    track = _track_input(cfg)
    (out_dir / "track.txt").write_text(traintrack.format_track(track) + "\n")
    rows = [f"{b.id},{g17(b.length)}" for b in track.branches]
    metrics = {"branches": track.n, "recurrent": traintrack.is_recurrent(track)}
    return "id,length", rows, metrics, [], None


def run_routes(cfg: Config):
    track = _track_input(cfg)
    L = cfg.number("params", "L")
    routes = traintrack.enumerate_routes(track, L)
    rows = [traintrack.route_csv_row(r) for r in routes]
    metrics = {"L": L, "count": len(routes)}
    return "start,branches,length", rows, metrics, [], None


def run_dimension(cfg: Config):
    track = _track_input(cfg)
    Ls = cfg.grid("params", "L")
    rows = []
    for L in Ls:
        n = traintrack.count_routes(track, L)
        est = math.log(n) / L if n else float("nan")
        rows.append(f"{g17(L)},{n},{g17(est)}")
    metrics = {"growth_exponent": traintrack.growth_exponent(track, Ls)}
    return "L,N,estimate", rows, metrics, [], ("1:3",)


def run_kappa(cfg: Config):
    group = fuchsian.octagon_group()
    R = cfg.integer("params", "R", "6")
    rows = []
    kappa, witness = 0.0, None
    for r in range(1, R + 1):
        kappa, witness = fuchsian.kappa_estimate(group, r)
        rows.append(f"{r},{g17(kappa)}")
    metrics = {"R": R, "kappa": kappa, "witness": str(witness), "phi": witness.phi}
    return "R,kappa", rows, metrics, [], ("1:2", "linespoints")


def run_qm(cfg: Config):
    group = fuchsian.octagon_group()
    x = cfg.frame("x", group)
    grid = cfg.grid("params", "t", "0:20:2")
    R = cfg.integer("params", "R", "8")
    kernel = cfg.boolean("params", "kernel", "true")
    samples = fuchsian.qm_defect(group, x, grid, R, kernel_only=kernel)
    rows = [
        f"{g17(s.t)},{g17(s.defect)},{'radius-limited' if s.radius_limited else 'ok'}"
        for s in samples
    ]
    metrics = {
        "sup_defect": max(s.defect for s in samples),
        "R": R,
        "radius_limited_samples": sum(1 for s in samples if s.radius_limited),
    }
    return "t,defect,flag", rows, metrics, [], ("1:2",)


def run_delta_spectrum(cfg: Config):
    group = fuchsian.octagon_group()
    if cfg.has("inputs", "h"):
        h = cfg.frame("h", group)
    else:
        h = psl2.IDENTITY
    R = cfg.integer("params", "R", "6")
    spec = fuchsian.delta_spectrum(group, h, R)
    rows = [
        f"{g17(r)},{str(w)},{w.phi}"
        for r, (w, _) in zip(spec.values, spec.witnesses)
    ]
    metrics = {
        "count": len(spec.values),
        "omega_count": spec.omega_count,
        "r_min": spec.values[0] if spec.values else float("nan"),
        "r_max": spec.values[-1] if spec.values else float("nan"),
    }
    return "r,word,phi", rows, metrics, [], ("0:1", "points")


def run_proximality(cfg: Config):
    group = fuchsian.octagon_group()
    x = cfg.frame("x", group)
    y = cfg.frame("y", group)
    grid = cfg.grid("params", "t", "0:10:0.5")
    R = cfg.integer("params", "R", "2")
    res = fuchsian.proximality_scan(x, y, group, grid, R)
    rows = [f"{g17(res.inf_dist)},{g17(res.ell)},{g17(res.t_star)},{str(res.word)}"]
    metrics = {
        "inf_dist": res.inf_dist,
        "ell": res.ell,
        "t_star": res.t_star,
        "omega_skipped": res.omega_skipped,
    }
    return "inf_dist,ell,t_star,word", rows, metrics, [], None


RUNNERS = {
    "iet-orbit": run_iet_orbit,
    "keane": run_keane,
    "weakmix": run_weakmix,
    "suspend": run_suspend,
    "flow": run_flow,
    "beta": run_beta,
    "track": run_track,
    "routes": run_routes,
    "dimension": run_dimension,
    "kappa": run_kappa,
    "qm": run_qm,
    "delta-spectrum": run_delta_spectrum,
    "proximality": run_proximality,
}

NEEDS_OUT_DIR = {"suspend", "track"}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zcover", description=__doc__)
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("config", type=Path)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=("float", "exact"), default="float")
    parser.add_argument("--out-dir", type=Path, default=Path("."))
    args = parser.parse_args(argv)

    started = time.monotonic()
    try:
        text = args.config.read_text()
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = Config(parse_config(text), args.mode, args.seed)
        args.out_dir.mkdir(parents=True, exist_ok=True)
        runner = RUNNERS[args.subcommand]
        if args.subcommand in NEEDS_OUT_DIR:
            header, rows, metrics, flags, plot = runner(cfg, args.out_dir)
        else:
            header, rows, metrics, flags, plot = runner(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ModeViolation as e:
        print(f"mode violation: {e}", file=sys.stderr)
        return EXIT_MODE

    stem = args.subcommand
    csv_path = args.out_dir / f"{stem}.csv"
    write_csv(csv_path, header, rows)
    if plot is not None:
        using = plot[0]
        style = plot[1] if len(plot) > 1 else "lines"
        write_plot(args.out_dir / f"{stem}.plt", csv_path.name, stem, using, style)
    summary = {
        "subcommand": stem,
        "config_echo": cfg.echo(),
        "metrics": metrics,
        "flags": flags,
        "runtime_ms": int((time.monotonic() - started) * 1000),
    }
    (args.out_dir / f"{stem}.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
