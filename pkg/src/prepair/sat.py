"""CNF conversion, a deterministic DPLL solver and DIMACS text exchange.

The solver decides variables in a fixed order (preferred atoms first, then
the remaining atoms in variable order, then Tseitin auxiliaries) with a
fixed polarity per variable and backtracks chronologically. With this
policy the first model found is the lexicographically first one with
respect to the decision order and polarities, so results are reproducible
and easy to predict by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from prepair.constraints import And, Atom, Const, Constraint, Not, Or


class DimacsError(ValueError):
    """Malformed DIMACS text."""


@dataclass
class CnfFormula:
    """Clauses over signed variable ids; variables ``1..n_atoms`` are transition atoms."""

    num_vars: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    atom_var: dict[str, int] = field(default_factory=dict)

    @property
    def var_atom(self) -> dict[int, str]:
        return {v: a for a, v in self.atom_var.items()}

    @property
    def n_atoms(self) -> int:
        return len(self.atom_var)

    @property
    def aux_vars(self) -> range:
        return range(self.n_atoms + 1, self.num_vars + 1)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, clause: Iterable[int]) -> None:
        cl = tuple(dict.fromkeys(clause))
        if not cl:
            raise ValueError("empty clause; encode false with a contradictory unit pair")
        if any(-x in cl for x in cl):
            return  # tautology
        self.clauses.append(cl)


class _Encoder:
    def __init__(self, f: CnfFormula):
        self.f = f
        self.cache: dict[Constraint, int] = {}
        self.true_var: int | None = None

    def const(self, value: bool) -> int:
        if self.true_var is None:
            self.true_var = self.f.new_var()
            self.f.add([self.true_var])
        return self.true_var if value else -self.true_var

    def lit(self, c: Constraint) -> int:
        if isinstance(c, Atom):
            return self.f.atom_var[c.id]
        if isinstance(c, Not):
            return -self.lit(c.arg)
        if isinstance(c, Const):
            return self.const(c.value)
        if c in self.cache:
            return self.cache[c]
        kids = [self.lit(a) for a in c.args]
        x = self.f.new_var()
        if isinstance(c, And):
            for k in kids:
                self.f.add([-x, k])
            self.f.add([x] + [-k for k in kids])
        elif isinstance(c, Or):
            self.f.add([-x] + kids)
            for k in kids:
                self.f.add([x, -k])
        else:
            raise TypeError(c)
        self.cache[c] = x
        return x

    def assert_(self, c: Constraint) -> None:
        if isinstance(c, And):
            for a in c.args:
                self.assert_(a)
            return
        if isinstance(c, Const):
            if not c.value:
                x = self.const(True)
                self.f.add([-x])
            return
        if isinstance(c, Or) and all(_is_literal(a) for a in c.args):
            self.f.add(self.lit(a) for a in c.args)
            return
        self.f.add([self.lit(c)])


def _is_literal(c: Constraint) -> bool:
    return isinstance(c, Atom) or (isinstance(c, Not) and isinstance(c.arg, Atom))


def to_cnf(c: Constraint, atoms: Sequence[str] | None = None) -> CnfFormula:
    """Equisatisfiable CNF of ``c``.

    ``atoms`` fixes the variable numbering (and so the default decision
    order); atoms of ``c`` not listed follow in sorted order.
    """
    f = CnfFormula()
    order = list(dict.fromkeys(atoms or ()))
    order += sorted(c.atoms() - set(order))
    for a in order:
        f.atom_var[a] = f.new_var()
    _Encoder(f).assert_(c)
    return f


# ------------------------------------------------------------------- solving
@dataclass(frozen=True)
class Sat:
    assignment: dict[str, bool]

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Unsat:
    def __bool__(self) -> bool:
        return False


def parse_preference(pref: Iterable[str], atoms: Iterable[str]) -> list[tuple[str, bool]]:
    """Resolve preference entries; a leading ``-`` asks for the atom to be tried false first."""
    known = set(atoms)
    out = []
    for p in pref:
        if p in known:
            out.append((p, True))
        elif p.startswith("-") and p[1:] in known:
            out.append((p[1:], False))
        else:
            raise ValueError(f"preference names unknown transition {p!r}")
    return out


class _Dpll:
    def __init__(self, f: CnfFormula, order: list[tuple[int, bool]]):
        self.n = f.num_vars
        self.clauses = [list(c) for c in f.clauses]
        self.order = order
        self.val = [0] * (self.n + 1)
        self.trail: list[int] = []
        self.watches: dict[int, list[int]] = {}
        self.units: list[int] = []
        for ci, cl in enumerate(self.clauses):
            if len(cl) == 1:
                self.units.append(cl[0])
            else:
                self.watches.setdefault(cl[0], []).append(ci)
                self.watches.setdefault(cl[1], []).append(ci)

    def value(self, lit: int) -> int:
        v = self.val[abs(lit)]
        return v if lit > 0 else -v

    def assign(self, lit: int) -> None:
        self.val[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)

    def propagate(self, head: int) -> tuple[bool, int]:
        while head < len(self.trail):
            false_lit = -self.trail[head]
            head += 1
            ws = self.watches.get(false_lit, [])
            i = 0
            while i < len(ws):
                ci = ws[i]
                cl = self.clauses[ci]
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], cl[0]
                if self.value(cl[0]) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self.value(cl[k]) != -1:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        ws[i] = ws[-1]
                        ws.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(cl[0]) == -1:
                    return False, head
                self.assign(cl[0])
                i += 1
        return True, head

    def undo_to(self, size: int) -> None:
        while len(self.trail) > size:
            self.val[abs(self.trail.pop())] = 0

    def next_decision(self) -> int | None:
        for v, pol in self.order:
            if self.val[v] == 0:
                return v if pol else -v
        return None

    def run(self) -> list[int] | None:
        for u in self.units:
            if self.value(u) == -1:
                return None
            if self.value(u) == 0:
                self.assign(u)
        ok, head = self.propagate(0)
        if not ok:
            return None
        # (trail size before the decision, decision literal, already flipped)
        stack: list[tuple[int, int, bool]] = []
        while True:
            lit = self.next_decision()
            if lit is None:
                return list(self.val)
            stack.append((len(self.trail), lit, False))
            self.assign(lit)
            ok, head = self.propagate(len(self.trail) - 1)
            while not ok:
                while stack and stack[-1][2]:
                    stack.pop()
                if not stack:
                    return None
                size, dlit, _ = stack.pop()
                self.undo_to(size)
                stack.append((size, -dlit, True))
                self.assign(-dlit)
                ok, head = self.propagate(size)


def solve(
    f: CnfFormula,
    preference: Sequence[str] = (),
    polarity: Mapping[str, bool] | None = None,
) -> Sat | Unsat:
    """Deterministic complete search; returns the first model in decision order.

    ``preference`` lists atoms to decide first (``-id`` to try ``id`` false
    first); every other atom is tried true first unless ``polarity`` says
    otherwise. Auxiliary variables come last and are tried false first.
    """
    polarity = dict(polarity or {})
    pref = parse_preference(preference, f.atom_var)
    order: list[tuple[int, bool]] = []
    seen: set[int] = set()
    for a, pol in pref:
        v = f.atom_var[a]
        if v not in seen:
            seen.add(v)
            order.append((v, pol))
    for a, v in f.atom_var.items():
        if v not in seen:
            seen.add(v)
            order.append((v, polarity.get(a, True)))
    order.extend((v, False) for v in f.aux_vars)
    model = _Dpll(f, order).run()
    if model is None:
        return Unsat()
    return Sat({a: model[v] == 1 for a, v in f.atom_var.items()})


def solve_constraint(c: Constraint, atoms: Sequence[str] | None = None, preference: Sequence[str] = (),
                     polarity: Mapping[str, bool] | None = None) -> Sat | Unsat:
    return solve(to_cnf(c, atoms), preference, polarity)


# -------------------------------------------------------------------- DIMACS
def export_dimacs(f: CnfFormula) -> str:
    lines = [f"c var {v} = {a}" for a, v in sorted(f.atom_var.items(), key=lambda kv: kv[1])]
    lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    lines.extend(" ".join(map(str, cl)) + " 0" for cl in f.clauses)
    return "\n".join(lines) + "\n"


def _var_comments(text: str) -> dict[str, int]:
    out = {}
    for line in text.splitlines():
        parts = line.split(None, 4)
        if len(parts) == 5 and parts[0] == "c" and parts[1] == "var" and parts[3] == "=":
            try:
                out[parts[4]] = int(parts[2])
            except ValueError as e:
                raise DimacsError(f"bad variable comment: {line!r}") from e
    return out


def parse_dimacs(text: str) -> CnfFormula:
    f = CnfFormula()
    header = None
    pending: list[int] = []
    for ln, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {ln}: bad header {s!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError as e:
                raise DimacsError(f"line {ln}: bad header {s!r}") from e
            continue
        if header is None:
            raise DimacsError(f"line {ln}: clause before header")
        for tok in s.split():
            try:
                x = int(tok)
            except ValueError as e:
                raise DimacsError(f"line {ln}: bad literal {tok!r}") from e
            if abs(x) > header[0]:
                raise DimacsError(f"line {ln}: literal {x} exceeds {header[0]} variables")
            if x == 0:
                if not pending:
                    raise DimacsError(f"line {ln}: empty clause")
                f.clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(x)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        raise DimacsError("last clause is not 0-terminated")
    if len(f.clauses) != header[1]:
        raise DimacsError(f"header announces {header[1]} clauses, found {len(f.clauses)}")
    f.num_vars = header[0]
    f.atom_var = dict(sorted(_var_comments(text).items(), key=lambda kv: kv[1]))
    return f


def import_model(text: str, f: CnfFormula | None = None) -> dict[str, bool] | None:
    """Read a solver answer (``s``/``v`` lines or bare literals); ``None`` for UNSAT.

    The variable map comes from ``f`` or from ``c var`` comments in ``text``.
    Atoms the model leaves open default to true.
    """
    atom_var = f.atom_var if f is not None else _var_comments(text)
    lits: dict[int, bool] = {}
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        low = s.lower()
        if low in ("unsat", "s unsatisfiable", "unsatisfiable"):
            return None
        if low in ("sat", "s satisfiable", "satisfiable"):
            continue
        if s.startswith("v "):
            s = s[2:]
        for tok in s.split():
            try:
                x = int(tok)
            except ValueError as e:
                raise DimacsError(f"bad model literal {tok!r}") from e
            if x:
                lits[abs(x)] = x > 0
    return {a: lits.get(v, True) for a, v in atom_var.items()}


def brute_force(f: CnfFormula) -> dict[int, bool] | None:
    """Reference check by enumeration; for tests only, exponential in ``num_vars``."""
    import itertools

    for bits in itertools.product((True, False), repeat=f.num_vars):
        if all(any(bits[abs(x) - 1] == (x > 0) for x in cl) for cl in f.clauses):
            return {i + 1: b for i, b in enumerate(bits)}
    return None


__all__ = [
    "CnfFormula",
    "DimacsError",
    "Sat",
    "Unsat",
    "brute_force",
    "export_dimacs",
    "import_model",
    "parse_dimacs",
    "parse_preference",
    "solve",
    "solve_constraint",
    "to_cnf",
]
