"""Batch front door: load a configuration, run a pipeline, emit a report.

Configurations are flat sectioned text (``[measure]``, ``[grid]``,
``[phi]``, ``[run]``) with one key per line and arrays as
whitespace-separated numbers.  Reports are line-oriented ``key value``
text with every number printed to 17 significant digits, plus an
optional JSON machine block; byte-identical across repeated runs on the
same configuration.

Exit codes: 0 success, 1 verification failure, 2 configuration or
validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .fock import FockSpace, SymmetricTensor, level_inner_product, symmetric_basis
from .jacobi import (
    adjoint_defect,
    annihilation,
    creation,
    export_lines,
    full,
    measure_hash,
    neutral,
    symmetry_defect,
    vacuum_moments,
)
from .measures import GridSpace, JumpMeasure, TestFunction, gauss_laguerre_gamma
from .meixner import detect
from .moments import CumulantModel, chaos_inner_product, moments_from_cumulants
from .orthopoly import RecurrenceTable, stieltjes

__all__ = ["main", "RunConfig", "load_config"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


class Report:
    """Accumulates ``key value`` lines and a parallel machine dictionary."""

    def __init__(self):
        self.lines: list[str] = []
        self.machine: dict = {}

    def add(self, key: str, *values) -> None:
        self.lines.append(" ".join([key] + [_fmt(v) for v in values]))
        self.machine[key] = values[0] if len(values) == 1 else list(values)

    def raw(self, line: str) -> None:
        self.lines.append(line)

    def render(self, with_json: bool) -> str:
        lines = list(self.lines)
        if with_json:
            lines.append("json " + json.dumps(self.machine, sort_keys=True))
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict[str, dict[str, list[str]]]:
    sections: dict[str, dict[str, list[str]]] = {}
    current: dict[str, list[str]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ValueError(f"config line {lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if current is None:
            raise ValueError(f"config line {lineno}: key outside any section")
        parts = line.split()
        current[parts[0]] = parts[1:]
    return sections


@dataclass
class RunConfig:
    """Validated run configuration.

    ``depth`` is the workhorse truncation: the recurrence-table depth for
    table-level commands, the operator truncation for moment and export
    pipelines (where the table depth is capped at the atom count, with
    exhausted-measure semantics taking over past it).
    """

    measure_type: str
    locations: tuple[float, ...]
    measure_weights: tuple[float, ...]
    gamma_order: int
    grid_weights: tuple[float, ...]
    phi_values: tuple[float, ...]
    depth: int
    max_moment: int
    tolerance: float
    oracle_levels: int
    fault_b1: float
    check_symmetry: bool

    def measure(self) -> JumpMeasure:
        if self.measure_type == "gamma":
            return gauss_laguerre_gamma(self.gamma_order)
        return JumpMeasure(self.locations, self.measure_weights)

    def grid(self) -> GridSpace:
        return GridSpace(self.grid_weights)

    def phi(self, grid: GridSpace) -> TestFunction:
        return TestFunction(grid, self.phi_values)

    def table(self, measure: JumpMeasure, depth: int) -> RecurrenceTable:
        table = stieltjes(measure, depth)
        if self.fault_b1 != 1.0:
            if table.depth < 2:
                raise ValueError("fault injection needs a table of depth at least 2")
            table = table.with_scaled_b(1, self.fault_b1)
        return table


def _require(section: dict, key: str, where: str) -> list[str]:
    if key not in section:
        raise ValueError(f"missing key '{key}' in [{where}]")
    return section[key]


def _scalar(section: dict, key: str, where: str, default=None) -> str:
    if key not in section:
        if default is None:
            raise ValueError(f"missing key '{key}' in [{where}]")
        return default
    values = section[key]
    if len(values) != 1:
        raise ValueError(f"key '{key}' in [{where}] expects one value")
    return values[0]


def load_config(path: str) -> RunConfig:
    """Parse and validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            sections = parse_config_text(handle.read())
    except OSError as exc:
        raise ValueError(f"cannot read config: {exc}") from exc

    for name in ("measure", "grid", "phi", "run"):
        if name not in sections:
            raise ValueError(f"missing section [{name}]")

    measure = sections["measure"]
    mtype = _scalar(measure, "type", "measure")
    locations: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    order = 0
    if mtype == "inline":
        locations = tuple(float(v) for v in _require(measure, "locations", "measure"))
        weights = tuple(float(v) for v in _require(measure, "weights", "measure"))
    elif mtype == "gamma":
        order = int(_scalar(measure, "order", "measure"))
        if order < 1:
            raise ValueError("gamma quadrature order must be at least 1")
    else:
        raise ValueError(f"unknown measure type '{mtype}' (want inline or gamma)")

    grid_weights = tuple(float(v) for v in _require(sections["grid"], "weights", "grid"))
    phi_values = tuple(float(v) for v in _require(sections["phi"], "values", "phi"))

    run = sections["run"]
    depth = int(_scalar(run, "depth", "run"))
    if depth < 1:
        raise ValueError("depth must be at least 1")
    max_moment = int(_scalar(run, "max_moment", "run", default=str(depth)))
    if max_moment < 0:
        raise ValueError("max_moment must be nonnegative")
    if max_moment > depth:
        raise ValueError(
            f"max_moment {max_moment} exceeds depth {depth}: moments past the "
            "truncation would be polluted"
        )
    tolerance = float(_scalar(run, "tolerance", "run", default="1e-8"))
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    oracle_levels = int(_scalar(run, "oracle_levels", "run", default=str(min(2, depth))))
    if oracle_levels < 0:
        raise ValueError("oracle_levels must be nonnegative")
    fault_b1 = float(_scalar(run, "fault_b1", "run", default="1"))
    if fault_b1 <= 0.0:
        raise ValueError("fault_b1 scale must be positive")
    check_symmetry = _scalar(run, "check_symmetry", "run", default="0") not in ("0", "false")

    cfg = RunConfig(
        measure_type=mtype,
        locations=locations,
        measure_weights=weights,
        gamma_order=order,
        grid_weights=grid_weights,
        phi_values=phi_values,
        depth=depth,
        max_moment=max_moment,
        tolerance=tolerance,
        oracle_levels=oracle_levels,
        fault_b1=fault_b1,
        check_symmetry=check_symmetry,
    )
    cfg.measure()
    cfg.phi(cfg.grid())
    return cfg


def cmd_recurrence(cfg: RunConfig, report: Report) -> int:
    """Print the recurrence table at the configured depth, fixed columns."""
    measure = cfg.measure()
    table = cfg.table(measure, cfg.depth)
    report.add("command", "recurrence")
    report.add("atoms", measure.atom_count)
    report.add("depth", table.depth)
    report.add("mass", measure.total_mass())
    report.raw(f"{'n':>3} {'a':>24} {'b':>24} {'norm_sq':>24}")
    for n in range(table.depth):
        b_text = _fmt(table.b[n]) if n > 0 else "-"
        report.raw(f"{n:>3} {_fmt(table.a[n]):>24} {b_text:>24} {_fmt(table.norm_sq[n]):>24}")
    report.machine["table"] = {
        "a": list(table.a),
        "b": list(table.b[1:]),
        "norm_sq": list(table.norm_sq),
    }
    return 0


def _operator_space(cfg: RunConfig):
    measure = cfg.measure()
    grid = cfg.grid()
    phi = cfg.phi(grid)
    table_depth = min(cfg.depth, measure.atom_count)
    table = cfg.table(measure, table_depth)
    space = FockSpace(grid, measure, table, cfg.depth)
    return measure, grid, phi, space


def cmd_verify_moments(cfg: RunConfig, report: Report) -> int:
    """Vacuum moments of the assembled operator against the cumulant recursion."""
    measure, grid, phi, space = _operator_space(cfg)
    operator_side = vacuum_moments(phi, space, cfg.max_moment)
    model = CumulantModel(measure, grid)
    oracle_side = [1.0]
    if cfg.max_moment >= 1:
        oracle_side += moments_from_cumulants(
            [model.cumulant(phi, p) for p in range(1, cfg.max_moment + 1)]
        )
    report.add("command", "verify-moments")
    report.add("measure-hash", measure_hash(measure))
    report.add("depth", cfg.depth)
    report.add("max-moment", cfg.max_moment)
    report.add("tolerance", cfg.tolerance)
    failed: list[int] = []
    for k in range(cfg.max_moment + 1):
        err = abs(operator_side[k] - oracle_side[k]) / max(1.0, abs(oracle_side[k]))
        report.add(f"moment{k}.operator", operator_side[k])
        report.add(f"moment{k}.oracle", oracle_side[k])
        report.add(f"moment{k}.rel-error", err)
        if err > cfg.tolerance:
            failed.append(k)
    symmetry_bad = False
    if cfg.check_symmetry:
        pair_defect = adjoint_defect(creation(phi, space), annihilation(phi, space))
        neutral_defect = symmetry_defect(neutral(phi, space))
        report.add("adjoint-defect", pair_defect)
        report.add("neutral-symmetry-defect", neutral_defect)
        symmetry_bad = max(pair_defect, neutral_defect) > cfg.tolerance
    report.add("status", "pass" if not (failed or symmetry_bad) else "fail")
    if failed:
        report.add("failed-orders", *failed)
    if failed or symmetry_bad:
        return 1
    return 0


def cmd_classify(cfg: RunConfig, report: Report) -> int:
    """Fit the Meixner-class patterns to the configured measure's table."""
    measure = cfg.measure()
    if cfg.depth < 3:
        raise ValueError("classification needs depth at least 3")
    table = cfg.table(measure, cfg.depth)
    params = detect(table, cfg.tolerance)
    report.add("command", "classify")
    report.add("measure-hash", measure_hash(measure))
    report.add("depth", table.depth)
    report.add("tolerance", cfg.tolerance)
    if params is None:
        report.add("class", "none")
        report.add("note", "not-in-meixner-class")
    else:
        report.add("lambda", params.lam)
        report.add("kappa", params.kappa)
        report.add("ratio", params.ratio)
        report.add("class", params.classification)
        report.add("residual.a", params.residual_a)
        report.add("residual.b", params.residual_b)
    return 0


def cmd_export_operator(cfg: RunConfig, report: Report) -> int:
    """Write the full operator in the sparse text format."""
    _measure, _grid, phi, space = _operator_space(cfg)
    operator = full(phi, space)
    for line in export_lines(operator):
        report.raw(line)
    return 0


def cmd_oracle_check(cfg: RunConfig, report: Report) -> int:
    """Block-formula inner products against the brute-force chaos oracle.

    The two agree exactly on a discrete grid through level two for any
    measure and through level three for symmetric or single-atom
    measures; in general they diverge beyond that, because the block
    formula is the continuum expression, whose higher collision patterns
    acquire grid-weight corrections on atomic grids.  The default level
    cap is therefore two; raise ``oracle_levels`` only within the
    validity domain of the measure at hand.
    """
    measure, grid, phi, space = _operator_space(cfg)
    del phi  # inner products do not involve the test function
    model = CumulantModel(measure, grid)
    report.add("command", "oracle-check")
    report.add("measure-hash", measure_hash(measure))
    report.add("levels", cfg.oracle_levels)
    report.add("tolerance", cfg.tolerance)
    worst_overall = 0.0
    pairs = 0
    for n in range(cfg.oracle_levels + 1):
        basis = symmetric_basis(n, grid)
        worst = 0.0
        embedded = [
            space.embed_symmetric(SymmetricTensor.basis_element(grid, n, i))
            for i in range(basis.dim)
        ]
        for i in range(basis.dim):
            fi = SymmetricTensor.basis_element(grid, n, i)
            for j in range(i, basis.dim):
                fj = SymmetricTensor.basis_element(grid, n, j)
                block_value = level_inner_product(embedded[i], embedded[j], n)
                oracle_value = chaos_inner_product(fi, fj, model, n)
                err = abs(block_value - oracle_value) / max(1.0, abs(oracle_value))
                worst = max(worst, err)
                pairs += 1
        report.add(f"level{n}.max-rel-error", worst)
        worst_overall = max(worst_overall, worst)
    report.add("pairs", pairs)
    report.add("max-rel-error", worst_overall)
    ok = worst_overall <= cfg.tolerance
    report.add("status", "pass" if ok else "fail")
    return 0 if ok else 1


_COMMANDS = {
    "recurrence": cmd_recurrence,
    "verify-moments": cmd_verify_moments,
    "classify": cmd_classify,
    "export-operator": cmd_export_operator,
    "oracle-check": cmd_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="levyfock",
        description="Field operators of Levy noise on a truncated extended Fock space.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run configuration")
    parser.add_argument("--tol", type=float, default=None, help="override the tolerance")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument(
        "--json", action="store_true", help="append a machine-readable JSON block"
    )
    args = parser.parse_args(argv)

    report = Report()
    try:
        cfg = load_config(args.config)
        if args.tol is not None:
            if args.tol <= 0.0:
                raise ValueError("tolerance must be positive")
            cfg.tolerance = args.tol
        code = _COMMANDS[args.command](cfg, report)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = report.render(args.json)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
