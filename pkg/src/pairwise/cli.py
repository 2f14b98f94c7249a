"""Command line: ``pairwise list`` and ``pairwise run <scenario> ...``.

Exit codes: 0 ok, 2 unknown scenario, 3 invalid parameters, 4 I/O failure.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, io, scenarios

EXIT_UNKNOWN, EXIT_PARAMS, EXIT_IO = 2, 3, 4


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = Path("pairwise-out")
    emit_plots: bool = False


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def parse_assignments(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise CliError(EXIT_PARAMS, "invalid_params", f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def read_config(path) -> dict:
    """Flat ``key=value`` lines; blank lines and ``#`` comments ignored."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", str(exc)) from exc
    items = [ln.split("#", 1)[0].strip() for ln in lines]
    return parse_assignments([ln for ln in items if ln])


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


PLOT_TEMPLATE = '''"""Plot every data file of this run (needs matplotlib)."""
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).parent
for name in {files!r}:
    path = here / name
    header = path.open().readline().lstrip("#").split()
    data = np.loadtxt(path, ndmin=2)
    fig, ax = plt.subplots()
    for k in range(1, data.shape[1]):
        ax.plot(data[:, 0], data[:, k], label=header[k])
    ax.set_xlabel(header[0])
    ax.legend()
    ax.set_title(name)
    fig.savefig(path.with_suffix(".png"), dpi=120)
'''


def run(config: ScenarioConfig) -> dict:
    """Execute a scenario and write its files; returns the manifest."""
    if config.scenario not in scenarios.REGISTRY:
        raise CliError(EXIT_UNKNOWN, "unknown_scenario",
                       f"unknown scenario {config.scenario!r}; see 'pairwise list'")
    started = _now()
    try:
        params = scenarios.resolve(config.scenario, config.params)
        result = scenarios.REGISTRY[config.scenario].run(params, config.seed)
    except (ValueError, KeyError, TypeError, FileNotFoundError) as exc:
        raise CliError(EXIT_PARAMS, "invalid_params", str(exc)) from exc
    out = Path(config.out_dir)
    try:
        io.ensure_dir(out)
        files = []
        for name, cols in sorted(result.tables.items()):
            fname = f"{name}.txt"
            io.write_columns(out / fname, cols)
            files.append(fname)
        summary = out / "summary.json"
        summary.write_text(json.dumps(result.summary, indent=2, sort_keys=True, default=float) + "\n")
        files.append(summary.name)
        if config.emit_plots:
            script = out / "plot.py"
            data = [f for f in files if f.endswith(".txt")]
            script.write_text(PLOT_TEMPLATE.format(files=data))
            files.append(script.name)
        manifest = {
            "scenario": config.scenario,
            "module": scenarios.REGISTRY[config.scenario].module,
            "params": params,
            "seed": config.seed,
            "version": __version__,
            "started": started,
            "finished": _now(),
            "files": [{"name": f, "sha256": io.sha256_file(out / f)} for f in files],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", str(exc)) from exc
    return manifest


def verify_manifest(out_dir) -> bool:
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())
    return all(io.sha256_file(out / f["name"]) == f["sha256"] for f in manifest["files"])


def list_scenarios() -> list[str]:
    return [f"{s.name:<22} {s.module:<9} {s.description}"
            for s in (scenarios.REGISTRY[n] for n in scenarios.names())]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairwise",
                                description="Simulations of spectrally correlated broadband light.")
    p.add_argument("--version", action="version", version=f"pairwise {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list scenarios")
    r = sub.add_parser("run", help="run a scenario")
    r.add_argument("scenario")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter (repeatable)")
    r.add_argument("--config", help="file of key=value overrides (--set wins)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default=None, help="output directory (default pairwise-out/<scenario>)")
    r.add_argument("--plots", action="store_true", help="also write a plotting script")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(list_scenarios()))
        return 0
    try:
        params = read_config(args.config) if args.config else {}
        params.update(parse_assignments(args.set))
        out = Path(args.out) if args.out else Path("pairwise-out") / args.scenario
        manifest = run(ScenarioConfig(args.scenario, params, args.seed, out, args.plots))
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc), "exit_code": exc.code}),
              file=sys.stderr)
        return exc.code
    print(json.dumps({"scenario": manifest["scenario"], "out": str(out),
                      "files": [f["name"] for f in manifest["files"]]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
