"""Command line entry point: ``slabcgo <experiment> [flags]`` or ``slabcgo run CONFIG``.

Configs are INI files with the sections experiment, geometry, material,
phase, grid, tolerances and output. Flags override config values. Every
experiment writes ``<name>.csv`` (a comment row, a header row, then data),
``<name>.json`` and ``plot_<name>.py`` into the output directory and exits 0
iff every suite tolerance is met.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments
from .fields import dump_grid_field

log = logging.getLogger("slabcgo")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# config blocks; None means "use the suite default"


@dataclass
class GeometryBlock:
    L: float | None = None
    box_half_width: float | None = None
    R: float | None = None
    R1: float | None = None
    R2: float | None = None


@dataclass
class MaterialBlock:
    omega: float | None = None
    k: float | None = None
    contrast: float | None = None
    radius: float | None = None


@dataclass
class PhaseBlock:
    xi: tuple | None = None
    scenario: str | None = None
    tau_list: tuple | None = None
    choice: str | None = None


@dataclass
class GridBlock:
    n: int | None = None
    n3: int | None = None
    modes: tuple | None = None
    side: float | None = None
    half_width: float | None = None


@dataclass
class OutputBlock:
    out: str = "results"
    dump_fields: bool = False


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    geometry: GeometryBlock = field(default_factory=GeometryBlock)
    material: MaterialBlock = field(default_factory=MaterialBlock)
    phase: PhaseBlock = field(default_factory=PhaseBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    tolerances: dict = field(default_factory=dict)
    output: OutputBlock = field(default_factory=OutputBlock)

    BLOCKS = ("geometry", "material", "phase", "grid", "output")

    # -- validation ---------------------------------------------------------
    def validate(self) -> "ExperimentConfig":
        if self.kind not in experiments.SUITES:
            raise ConfigError(f"experiment.kind: unknown experiment {self.kind!r}; "
                              f"expected one of {sorted(experiments.SUITES)}")
        taus = self.phase.tau_list
        if taus is not None:
            if len(taus) == 0:
                raise ConfigError("phase.tau_list: tau list is empty")
            if any(t <= 0 for t in taus):
                raise ConfigError("phase.tau_list: tau values must be positive")
            if any(b <= a for a, b in zip(taus, taus[1:])):
                raise ConfigError("phase.tau_list: tau list must be strictly increasing")
        if self.phase.xi is not None and len(self.phase.xi) != 3:
            raise ConfigError("phase.xi: xi needs three components")
        if self.phase.scenario is not None and self.phase.scenario not in ("same", "opp", "opposite"):
            raise ConfigError(f"phase.scenario: expected same or opp, got {self.phase.scenario!r}")
        suite_cfg = experiments.SUITES[self.kind][1]
        names = {f.name for f in dataclasses.fields(suite_cfg) if _is_tolerance(f.name)}
        for key, value in self.tolerances.items():
            if key not in names:
                raise ConfigError(f"tolerances.{key}: not a tolerance of {self.kind}")
            if not value > 0:
                raise ConfigError(f"tolerances.{key}: tolerance must be positive, got {value}")
        for name, value in (("grid.n", self.grid.n), ("grid.n3", self.grid.n3)):
            if value is not None and value <= 0:
                raise ConfigError(f"{name}: must be positive")
        return self

    # -- serialization ------------------------------------------------------
    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["experiment"] = {"kind": self.kind, "seed": str(self.seed)}
        for name in self.BLOCKS:
            block = getattr(self, name)
            cp[name] = {f.name: _format(getattr(block, f.name)) for f in dataclasses.fields(block)
                        if getattr(block, f.name) is not None}
        cp["tolerances"] = {k: repr(float(v)) for k, v in self.tolerances.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as err:
            raise ConfigError(f"unreadable config: {err}") from None
        if not cp.has_option("experiment", "kind"):
            raise ConfigError("experiment.kind: missing")
        exp = cp["experiment"]
        cfg = cls(kind=exp["kind"].strip(), seed=_parse("experiment.seed", exp.get("seed", "0"), "int"))
        for name in cls.BLOCKS:
            if not cp.has_section(name):
                continue
            block = getattr(cfg, name)
            types = {f.name: f.type for f in dataclasses.fields(block)}
            for key, raw in cp[name].items():
                if key not in types:
                    raise ConfigError(f"{name}.{key}: unknown field")
                setattr(block, key, _parse(f"{name}.{key}", raw, types[key]))
        if cp.has_section("tolerances"):
            cfg.tolerances = {k: _parse(f"tolerances.{k}", v, "float") for k, v in cp["tolerances"].items()}
        return cfg


def _is_tolerance(name: str) -> bool:
    return name.endswith("tol") or name.startswith(("min_", "max_")) or name == "bound_growth"


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, raw: str, typ: str):
    raw = raw.strip()
    try:
        if typ.startswith("tuple"):
            return tuple(float(v) for v in raw.replace(",", " ").split()) if raw else ()
        if typ.startswith("float"):
            return float(raw)
        if typ.startswith("int"):
            return int(raw)
        if typ.startswith("bool"):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        return raw
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {typ.split()[0]}") from None


# ---------------------------------------------------------------------------
# mapping onto suite configs


def suite_config(cfg: ExperimentConfig):
    """The suite dataclass of ``cfg.kind`` with every set config value applied."""
    cls = experiments.SUITES[cfg.kind][1]
    names = {f.name: f for f in dataclasses.fields(cls)}
    g, m, p, gr = cfg.geometry, cfg.material, cfg.phase, cfg.grid
    values = dict(L=g.L, box_half_width=g.box_half_width, omega=m.omega, k=m.k, contrast=m.contrast,
                  radius=m.radius, xi=p.xi, scenario=p.scenario, taus=p.tau_list, choice=p.choice,
                  n=gr.n, n3=gr.n3, side=gr.side, half_width=gr.half_width, seed=cfg.seed)
    if None not in (g.R, g.R1, g.R2):
        values["cutoff"] = (g.R, g.R1, g.R2)
    if gr.modes is not None:
        modes = tuple(int(v) for v in gr.modes)
        values["modes"] = modes if names.get("modes") and isinstance(names["modes"].default, tuple) else max(modes)
    if cfg.kind == "lax-phillips" and m.radius is not None:
        values["bump_radius"] = values.pop("radius")
    values.update(cfg.tolerances)
    kwargs = {k: v for k, v in values.items() if v is not None and k in names}
    unused = sorted(k for k, v in values.items() if v is not None and k not in names)
    if unused:
        log.debug("%s ignores config values %s", cfg.kind, unused)
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# output


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, rows: list, description: str, columns=None) -> None:
    columns = list(columns or rows[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {description}\n")
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r.get(c, "")) for c in columns])


PLOT_SCRIPT = '''"""Plot every numeric column of {csv} against its first numeric column."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
with open(path, newline="", encoding="utf-8") as fh:
    lines = [line for line in fh if not line.startswith("#")]
rows = list(csv.DictReader(lines))


def numeric(col):
    try:
        return [float(r[col]) for r in rows]
    except ValueError:
        return None


cols = [c for c in rows[0] if numeric(c) is not None]
x = cols[0]
fig, ax = plt.subplots()
for c in cols[1:]:
    y = numeric(c)
    if all(v > 0 for v in y):
        ax.loglog(numeric(x), y, "o-", label=c)
ax.set_xlabel(x)
ax.legend(fontsize="small")
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def write_outputs(result, cfg: ExperimentConfig, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    stem = result.name.replace("-", "_")
    paths = dict(csv=out / f"{stem}.csv", json=out / f"{stem}.json", plot=out / f"plot_{stem}.py")
    write_csv(paths["csv"], result.rows, result.description, result.columns)
    for name, rows in result.tables.items():
        if rows:
            p = out / f"{stem}_{name}.csv"
            write_csv(p, rows, f"{result.description} ({name})")
            paths[name] = p
    paths["plot"].write_text(PLOT_SCRIPT.format(csv=paths["csv"].name), encoding="utf-8")
    if cfg.output.dump_fields:
        for name, gf in result.fields.items():
            p = out / f"{stem}_{name}.bin"
            dump_grid_field(gf, p)
            paths[name] = p
    report = dict(experiment=result.name, passed=bool(result.passed), report=_plain(result.report),
                  config=cfg.to_ini())
    paths["json"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def run(cfg: ExperimentConfig, out: str | None = None):
    """Run one configured experiment and write its artifacts; returns (exit code, result)."""
    cfg.validate()
    func = experiments.SUITES[cfg.kind][0]
    try:
        scfg = suite_config(cfg)
    except TypeError as err:
        raise ConfigError(f"{cfg.kind}: {err}") from None
    result = func(scfg)
    write_outputs(result, cfg, Path(out or cfg.output.out))
    result.passed = bool(result.passed)
    return (EXIT_OK if result.passed else EXIT_FAILED), result


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


FLAGS = {
    "--config": dict(help="INI config file; flags override its values"),
    "--out": dict(help="output directory"),
    "--seed": dict(type=int),
    "--xi": dict(type=_floats, help="three components, comma or space separated"),
    "--tau-list": dict(type=_floats, dest="tau_list"),
    "--scenario": dict(choices=["same", "opp", "opposite"]),
    "--choice": dict(choices=["beta", "alpha"]),
    "--contrast": dict(type=float),
    "--omega": dict(type=float),
    "--k": dict(type=float),
    "--L": dict(type=float, dest="L"),
    "--modes": dict(type=_floats),
    "--grid": dict(type=int, help="points (or cells) per transverse axis"),
    "--n3": dict(type=int, help="cells across the slab"),
    "--dump-fields": dict(action="store_true", dest="dump_fields", default=None),
}


def _apply_flags(cfg: ExperimentConfig, ns) -> ExperimentConfig:
    def put(block, key, value):
        if value is not None:
            setattr(getattr(cfg, block), key, value)

    if ns.seed is not None:
        cfg.seed = ns.seed
    put("phase", "xi", ns.xi)
    put("phase", "tau_list", ns.tau_list)
    put("phase", "scenario", ns.scenario)
    put("phase", "choice", ns.choice)
    put("material", "contrast", ns.contrast)
    put("material", "omega", ns.omega)
    put("material", "k", ns.k)
    put("geometry", "L", ns.L)
    put("grid", "modes", ns.modes)
    put("grid", "n", ns.grid)
    put("grid", "n3", ns.n3)
    put("output", "dump_fields", ns.dump_fields)
    if ns.out is not None:
        cfg.output.out = ns.out
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slabcgo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run the experiment named in a config file")
    runp.add_argument("config_file")
    for name in experiments.SUITES:
        p = sub.add_parser(name, help=f"run the {name} suite")
        for flag, kw in FLAGS.items():
            p.add_argument(flag, **kw)
    runp.add_argument("--out")
    return parser


def load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    return ExperimentConfig.from_ini(text)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if ns.command == "run":
            cfg = load_config(ns.config_file)
            if ns.out:
                cfg.output.out = ns.out
        else:
            cfg = load_config(ns.config) if ns.config else ExperimentConfig(kind=ns.command)
            cfg.kind = ns.command
            cfg = _apply_flags(cfg, ns)
        code, result = run(cfg)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    except ValueError as err:
        log.error("invalid setup: %s", err)
        return EXIT_CONFIG
    except RuntimeError as err:
        log.error("solver failure: %s", err)
        return EXIT_FAILED
    status = "PASS" if result.passed else "FAIL"
    log.info("%s %s -> %s", result.name, status, Path(cfg.output.out).resolve())
    return code


if __name__ == "__main__":
    sys.exit(main())
