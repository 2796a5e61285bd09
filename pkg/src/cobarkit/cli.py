"""Command-line front end: ``cobarkit <command> --manifest file.json``.

Exit status is 0 when every check of the command passes, 1 when a
verification fails and 2 for unreadable or invalid input.  The
machine-readable report written by ``--json-out`` depends only on the
manifest and the seed.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from .convolution import ConvAlgebra, bracket_symmetry_failures, verify_shlie_relations
from .enriched import associativity_harness, sample_elements, unit_harness
from .errors import CobarKitError, ManifestError, NotAOneCell
from .exactlin import cohomology
from .hoalg import ResidualReport, compose_morphisms, is_quasi_iso, verify_cobar_structure, verify_infinity_morphism
from .manifest import (Manifest, arity_map_to_json, complex_to_json, dumps, graded_map_to_json, key_to_json,
                       load_manifest, vector_to_json)
from .paths import chain_homotopy_from_cell, verify_one_cell
from .transfer import homotopy_transfer, transfer_uniqueness_cell

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class Report:
    def __init__(self, command: str, seed: int):
        self.command = command
        self.seed = seed
        self.checks: List[Dict[str, Any]] = []
        self.outputs: Dict[str, Any] = {}

    def check(self, name: str, ok: bool, detail: str, witness: Any = None) -> None:
        entry = {"name": name, "ok": bool(ok), "detail": detail}
        if witness is not None:
            entry["witness"] = witness
        self.checks.append(entry)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def as_json(self) -> Dict[str, Any]:
        return {"command": self.command, "seed": self.seed, "ok": self.ok, "checks": self.checks,
                "outputs": self.outputs}

    def text(self) -> str:
        lines = [f"{'PASS' if c['ok'] else 'FAIL'} {c['name']}: {c['detail']}" for c in self.checks]
        lines.append(f"{self.command}: {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines)


def _residual_witness(m: Manifest, rep: ResidualReport, source_space, target_space) -> Optional[List[Any]]:
    if rep.ok:
        return None
    key, val = rep.witness
    return [key_to_json(m.cooperad, key, source_space), vector_to_json(val, target_space)]


def _detail(summary: str) -> str:
    """Drop the report's own label, since the check name already says what was verified."""
    return summary.split(": ", 1)[-1]


def _names(params: Dict[str, Any], field: str, table: Dict[str, Any], kind: str) -> List[str]:
    names = params.get(field, sorted(table))
    for n in names:
        if n not in table:
            raise ManifestError(f"command parameter {field!r}: unresolved {kind} name {n!r}")
    return list(names)


def _pairs(params: Dict[str, Any], m: Manifest) -> List[List[str]]:
    pairs = params.get("pairs")
    if pairs is None:
        pairs = [[n, n] for n in sorted(m.structures)]
    for pair in pairs:
        if len(pair) != 2 or any(p not in m.structures for p in pair):
            raise ManifestError(f"command parameter 'pairs': {pair!r} is not a pair of structure names")
    return pairs


# ---------------------------------------------------------------------------
# commands


def cmd_check_structure(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    for name in _names(params, "structures", m.structures, "structure"):
        A = m.structures[name]
        r = verify_cobar_structure(A.carrier, A.structure)
        rep.check(f"structure {name}", r.ok, r.summary(), _residual_witness(m, r, A.carrier.space, A.carrier.space))


def cmd_check_morphism(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    for name in _names(params, "morphisms", m.morphisms, "morphism"):
        F = m.morphisms[name]
        r = verify_infinity_morphism(F)
        detail = r.summary() + (", quasi-isomorphism" if r.ok and is_quasi_iso(F) else "")
        rep.check(f"morphism {name}", r.ok, detail,
                  _residual_witness(m, r, F.source.carrier.space, F.target.carrier.space))


def cmd_check_linf(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    max_m = int(params.get("max_m", 3))
    count = int(params.get("samples", 2))
    for src, tgt in _pairs(params, m):
        L = ConvAlgebra(m.cooperad, m.structures[src], m.structures[tgt])
        rng = random.Random(m.seed)
        fs = sample_elements(L, rng, count, (0, 1))
        jac = verify_shlie_relations(L, fs, max_m=max_m, seed=m.seed)
        witness = None
        if jac.failures:
            label, key, val = jac.failures[0]
            witness = [label, key_to_json(m.cooperad, key, L.V.space), vector_to_json(val, L.W.space)]
        rep.check(f"jacobi Conv({src},{tgt})", jac.ok,
                  f"{jac.checked} evaluations, {len(jac.failures)} nonzero", witness)
        sym = []
        for j in range(2, min(max_m, 3) + 1):
            sym += bracket_symmetry_failures(L, (fs * j)[:j])
        rep.check(f"symmetry Conv({src},{tgt})", not sym, "ok" if not sym else ", ".join(sym))


def cmd_compose(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    pairs = params.get("pairs")
    if not pairs:
        raise ManifestError("compose needs 'pairs': [[first, second(, name)], ...]")
    for pair in pairs:
        first, second = pair[0], pair[1]
        F = m.morphisms.get(first)
        G = m.morphisms.get(second)
        if F is None or G is None:
            raise ManifestError(f"compose: unresolved morphism in {pair!r}")
        if G.source is not F.target:
            raise ManifestError(f"compose: the target of {first!r} is not the source of {second!r}")
        GF = compose_morphisms(G, F)
        r = verify_infinity_morphism(GF)
        name = pair[2] if len(pair) > 2 else f"{second}.{first}"
        rep.check(f"composite {name}", r.ok, r.summary(),
                  _residual_witness(m, r, GF.source.carrier.space, GF.target.carrier.space))
        rep.outputs.setdefault("morphisms", {})[name] = {
            "source": _structure_name(m, F.source), "target": _structure_name(m, G.target),
            "map": arity_map_to_json(GF.components)}


def _structure_name(m: Manifest, A) -> str:
    for name, X in m.structures.items():
        if X is A:
            return name
    raise KeyError("structure not registered in the manifest")


def cmd_transfer(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    jobs = params.get("jobs") or [params]
    for job in jobs:
        bname = job.get("structure")
        cname = job.get("contraction")
        if bname not in m.structures or cname not in m.contractions:
            raise ManifestError("transfer needs a 'structure' and a 'contraction' that resolve")
        B = m.structures[bname]
        c = m.contractions[cname]
        if c.big != B.carrier:
            raise ManifestError(f"transfer: contraction {cname!r} does not start from the carrier of {bname!r}")
        name = job.get("name", f"{bname}.transfer")
        small_name = m.complex_name(c.small) if any(x is c.small for x in m.complexes.values()) else name
        res = homotopy_transfer(B, c, name=name)
        s_cert, m_cert = res.certificates
        rep.check(f"transfer {name} structure", s_cert.ok, s_cert.summary())
        rep.check(f"transfer {name} morphism", m_cert.ok, m_cert.summary() + ", linear term = include")
        rep.outputs.setdefault("complexes", {})[small_name] = complex_to_json(c.small)
        rep.outputs.setdefault("structures", {})[name] = {"complex": small_name,
                                                          "map": arity_map_to_json(res.transferred.structure)}
        rep.outputs.setdefault("morphisms", {})[f"{name}.inclusion"] = {
            "source": name, "target": bname, "map": arity_map_to_json(res.morphism.components)}


def cmd_check_homotopy(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    for name in _names(params, "one_cells", m.one_cells, "one-cell"):
        K = m.one_cells[name]
        r = verify_one_cell(K)
        rep.check(f"one-cell {name}", r.ok, _detail(r.summary()))
        if r.ok:
            s = chain_homotopy_from_cell(K)
            rep.outputs.setdefault("homotopies", {})[name] = graded_map_to_json(s)
    for job in params.get("uniqueness", []):
        bname = job.get("structure")
        cs = job.get("contractions", [])
        if bname not in m.structures or len(cs) != 2 or any(c not in m.contractions for c in cs):
            raise ManifestError("uniqueness jobs need a 'structure' and two 'contractions'")
        B = m.structures[bname]
        r1 = homotopy_transfer(B, m.contractions[cs[0]])
        r2 = homotopy_transfer(B, m.contractions[cs[1]])
        cell = transfer_uniqueness_cell(r1, r2)
        cr = verify_one_cell(cell)
        label = f"uniqueness {cs[0]}~{cs[1]}"
        rep.check(label, cr.ok, _detail(cr.summary()))
        if cr.ok:
            try:
                s = chain_homotopy_from_cell(cell)
            except NotAOneCell as exc:
                rep.check(f"{label} homotopy", False, str(exc))
            else:
                rep.check(f"{label} homotopy", True, "linear terms differ by ∂s + s∂")
                rep.outputs.setdefault("homotopies", {})[label] = graded_map_to_json(s)


def cmd_check_unit(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    pairs = params.get("pairs")
    if pairs is None:
        names = sorted(m.structures)
        pairs = [[a, b] for a in names for b in names][:4]
    for a, b in pairs:
        if a not in m.structures or b not in m.structures:
            raise ManifestError(f"check-unit: unresolved structure in {[a, b]!r}")
        r = unit_harness(m.structures[a], m.structures[b], seed=m.seed)
        rep.check(f"unit {a}->{b}", r.ok, r.summary())


def cmd_check_assoc(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    names = params.get("algebras")
    if names is None:
        names = (sorted(m.structures) * 4)[:4]
    if len(names) != 4 or any(n not in m.structures for n in names):
        raise ManifestError("check-assoc needs 'algebras': four structure names")
    r = associativity_harness(*(m.structures[n] for n in names), seed=m.seed,
                              samples=int(params.get("samples", 4)), max_len=int(params.get("max_len", 4)))
    rep.check("pentagon " + "->".join(names), r.ok, r.summary())


def cmd_cohomology(m: Manifest, params: Dict[str, Any], rep: Report) -> None:
    for name in _names(params, "complexes", m.complexes, "complex"):
        dims = cohomology(m.complexes[name])
        text = ", ".join(f"H^{d} = {k}" for d, k in dims if k) or "acyclic"
        rep.check(f"cohomology {name}", True, text)
        rep.outputs.setdefault("cohomology", {})[name] = {str(d): k for d, k in dims}


COMMANDS: Dict[str, Callable[[Manifest, Dict[str, Any], Report], None]] = {
    "check-structure": cmd_check_structure,
    "check-morphism": cmd_check_morphism,
    "check-linf": cmd_check_linf,
    "compose": cmd_compose,
    "transfer": cmd_transfer,
    "check-homotopy": cmd_check_homotopy,
    "check-unit": cmd_check_unit,
    "check-assoc": cmd_check_assoc,
    "cohomology": cmd_cohomology,
}


def run_command(m: Manifest, cmd: str, params: Optional[Dict[str, Any]] = None) -> Report:
    """Run one command; parameters default to the manifest's ``commands[cmd]`` block."""
    if cmd not in COMMANDS:
        raise ManifestError(f"unknown command {cmd!r}; choose from {', '.join(COMMANDS)}")
    rep = Report(cmd, m.seed)
    COMMANDS[cmd](m, dict(m.commands.get(cmd, {}) if params is None else params), rep)
    return rep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cobarkit", description="Exact checks for homotopy algebras over a cooperad.")
    p.add_argument("command", choices=sorted(COMMANDS) + ["all"],
                   help="command to run; 'all' runs every command listed in the manifest")
    p.add_argument("--manifest", required=True, help="path to the JSON manifest")
    p.add_argument("--max-arity", type=int, default=None, help="truncation arity N (overrides the manifest)")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized harnesses (overrides the manifest)")
    p.add_argument("--json-out", default=None, help="write the machine-readable report to this path")
    p.add_argument("--allow-large-arity", action="store_true", help="permit N above 6")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INPUT
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be a non-negative integer", file=sys.stderr)
        return EXIT_INPUT
    try:
        m = load_manifest(args.manifest, args.max_arity, args.seed, args.allow_large_arity)
        commands = list(m.commands) if args.command == "all" else [args.command]
        if not commands:
            raise ManifestError("the manifest lists no commands for 'all'")
        reports = [run_command(m, c) for c in commands]
    except ManifestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CobarKitError as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for r in reports:
        print(r.text())
    if args.json_out:
        doc = reports[0].as_json() if len(reports) == 1 else {"reports": [r.as_json() for r in reports],
                                                             "ok": all(r.ok for r in reports)}
        try:
            with open(args.json_out, "w", encoding="utf-8") as fh:
                fh.write(dumps(doc))
        except OSError as exc:
            print(f"input error: cannot write {args.json_out}: {exc.strerror}", file=sys.stderr)
            return EXIT_INPUT
    return EXIT_PASS if all(r.ok for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
