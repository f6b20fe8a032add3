"""Machine text emission, in Atelier-B ASCII or paper-style Unicode."""
from __future__ import annotations

from scade2b.core.config import settings
from scade2b.models.b_ast import (
    Assign,
    BApply,
    BBinOp,
    BBool,
    BBoolOf,
    BConstFunction,
    BExpr,
    BField,
    BIdent,
    BInt,
    BInterval,
    BMachine,
    BMaplets,
    BNeg,
    BOperation,
    BRecord,
    BStructSet,
    BTotalFunction,
    Case,
    FunctionOverride,
    If,
    OpCall,
    PAnd,
    Parallel,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    PNot,
    POr,
    Predicate,
    Seq,
    Skip,
    Substitution,
    Var,
    While,
)

_UNICODE = {
    "&": "∧",
    "or": "∨",
    "=>": "⇒",
    ":": "∈",
    "/=": "≠",
    "<=": "≤",
    ">=": "≥",
    "-->": "→",
    "|->": "↦",
    "!": "∀",
    "<--": "←",
    "not": "¬",
}

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "mod": 2}


class BEmitter:
    def __init__(self, flavor: str | None = None, indent: int | None = None):
        self.flavor = flavor or settings.EMITTER_FLAVOR
        self.unit = " " * (indent if indent is not None else settings.INDENT_WIDTH)

    def sym(self, token: str) -> str:
        return _UNICODE.get(token, token) if self.flavor == "unicode" else token

    # ---- expressions ----
    def expr(self, e: BExpr) -> str:
        if isinstance(e, BInt):
            return str(e.value)
        if isinstance(e, BBool):
            return "TRUE" if e.value else "FALSE"
        if isinstance(e, BIdent):
            return e.name
        if isinstance(e, BBinOp):
            prec = _PRECEDENCE[e.op]
            left = self._operand(e.left, prec, right=False)
            right = self._operand(e.right, prec, right=True)
            return f"{left} {e.op} {right}"
        if isinstance(e, BNeg):
            inner = self.expr(e.operand)
            return f"-{inner}" if isinstance(e.operand, (BIdent, BApply, BField)) else f"-({inner})"
        if isinstance(e, BApply):
            return f"{self.expr(e.function)}({self.expr(e.arg)})"
        if isinstance(e, BField):
            return f"{self._atom(e.target)}'{e.name}"
        if isinstance(e, BRecord):
            return "rec(" + ", ".join(f"{name}: {self.expr(value)}" for name, value in e.fields) + ")"
        if isinstance(e, BStructSet):
            return "struct(" + ", ".join(f"{name}: {self.expr(value)}" for name, value in e.fields) + ")"
        if isinstance(e, BInterval):
            return f"{self._bound(e.low)}..{self._bound(e.high)}"
        if isinstance(e, BMaplets):
            arrow = self.sym("|->")
            return "{" + ", ".join(f"{self.expr(k)} {arrow} {self.expr(v)}" for k, v in e.pairs) + "}"
        if isinstance(e, BConstFunction):
            return f"({self.expr(e.domain)}) * {{{self.expr(e.value)}}}"
        if isinstance(e, BTotalFunction):
            return f"{self.expr(e.domain)} {self.sym('-->')} {self.expr(e.range)}"
        if isinstance(e, BBoolOf):
            return f"bool({self.pred(e.pred)})"
        raise TypeError(f"cannot emit expression {e!r}")

    def _atom(self, e: BExpr) -> str:
        if isinstance(e, (BIdent, BApply, BField, BRecord, BMaplets, BBool, BBoolOf)) or (
            isinstance(e, BInt) and e.value >= 0
        ):
            return self.expr(e)
        return f"({self.expr(e)})"

    def _bound(self, e: BExpr) -> str:
        return str(e.value) if isinstance(e, BInt) else self._atom(e)

    def _operand(self, e: BExpr, prec: int, right: bool) -> str:
        if isinstance(e, BBinOp):
            inner = _PRECEDENCE[e.op]
            if inner < prec or (right and inner == prec):
                return f"({self.expr(e)})"
            return self.expr(e)
        if isinstance(e, (BInterval, BTotalFunction, BConstFunction, BNeg)) or (isinstance(e, BInt) and e.value < 0):
            return f"({self.expr(e)})"
        return self.expr(e)

    # ---- predicates ----
    def pred(self, p: Predicate) -> str:
        if isinstance(p, PAnd):
            return f" {self.sym('&')} ".join(self._child(part) for part in p.parts)
        if isinstance(p, POr):
            return f" {self.sym('or')} ".join(self._child(part) for part in p.parts)
        if isinstance(p, PImplies):
            return f"{self._child(p.left)} {self.sym('=>')} {self._child(p.right)}"
        if isinstance(p, PNot):
            return f"{self.sym('not')}({self.pred(p.operand)})"
        if isinstance(p, PCompare):
            return f"{self.expr(p.left)} {self.sym(p.op)} {self.expr(p.right)}"
        if isinstance(p, PMember):
            return f"{self.expr(p.element)} {self.sym(':')} {self.expr(p.set)}"
        if isinstance(p, PForAll):
            return f"{self.sym('!')}{p.var}.({self.pred(p.body)})"
        raise TypeError(f"cannot emit predicate {p!r}")

    def _child(self, p: Predicate) -> str:
        if isinstance(p, (PAnd, POr, PImplies)):
            return f"({self.pred(p)})"
        return self.pred(p)

    def conjunct_lines(self, parts, depth: int) -> list[str]:
        lines = [f"{self.unit * depth}{self._child(part)}" for part in parts]
        return [line + f" {self.sym('&')}" for line in lines[:-1]] + lines[-1:]

    # ---- substitutions ----
    def sub(self, s: Substitution, depth: int) -> list[str]:
        pad = self.unit * depth
        if isinstance(s, Assign):
            return [f"{pad}{s.name} := {self.expr(s.value)}"]
        if isinstance(s, FunctionOverride):
            return [f"{pad}{s.name}({self.expr(s.index)}) := {self.expr(s.value)}"]
        if isinstance(s, Skip):
            return [f"{pad}skip"]
        if isinstance(s, Seq):
            return self._joined(s.items, depth, ";", wrap=Parallel)
        if isinstance(s, Parallel):
            return self._joined(s.items, depth, " ||", wrap=Seq)
        if isinstance(s, If):
            lines: list[str] = []
            for position, (cond, body) in enumerate(s.branches):
                keyword = "IF" if position == 0 else "ELSIF"
                lines.append(f"{pad}{keyword} {self.pred(cond)} THEN")
                lines.extend(self.sub(body, depth + 1))
            if s.else_ is not None:
                lines.append(f"{pad}ELSE")
                lines.extend(self.sub(s.else_, depth + 1))
            lines.append(f"{pad}END")
            return lines
        if isinstance(s, Case):
            lines = [f"{pad}CASE {self.expr(s.scrutinee)} OF"]
            for position, (labels, body) in enumerate(s.arms):
                keyword = "EITHER" if position == 0 else "OR"
                lines.append(f"{pad}{self.unit}{keyword} {', '.join(self.expr(l) for l in labels)} THEN")
                lines.extend(self.sub(body, depth + 2))
            if s.else_ is not None:
                lines.append(f"{pad}{self.unit}ELSE")
                lines.extend(self.sub(s.else_, depth + 2))
            lines.append(f"{pad}{self.unit}END")
            lines.append(f"{pad}END")
            return lines
        if isinstance(s, While):
            lines = [f"{pad}WHILE {self.pred(s.condition)} DO"]
            lines.extend(self.sub(s.body, depth + 1))
            if s.invariant is not None:
                lines.append(f"{pad}INVARIANT")
                lines.append(f"{pad}{self.unit}{self.pred(s.invariant)}")
            if s.variant is not None:
                lines.append(f"{pad}VARIANT")
                lines.append(f"{pad}{self.unit}{self.expr(s.variant)}")
            lines.append(f"{pad}END")
            return lines
        if isinstance(s, Var):
            lines = [f"{pad}VAR {', '.join(s.names)} IN"]
            lines.extend(self.sub(s.body, depth + 1))
            lines.append(f"{pad}END")
            return lines
        if isinstance(s, OpCall):
            call = s.op + (f"({', '.join(self.expr(a) for a in s.args)})" if s.args else "")
            if s.outputs:
                call = f"{', '.join(self.expr(o) for o in s.outputs)} {self.sym('<--')} {call}"
            return [f"{pad}{call}"]
        raise TypeError(f"cannot emit substitution {s!r}")

    def _joined(self, items, depth: int, separator: str, wrap) -> list[str]:
        pad = self.unit * depth
        lines: list[str] = []
        for position, item in enumerate(items):
            if isinstance(item, wrap):
                chunk = [f"{pad}BEGIN", *self.sub(item, depth + 1), f"{pad}END"]
            else:
                chunk = self.sub(item, depth)
            if position < len(items) - 1:
                chunk[-1] += separator
            lines.extend(chunk)
        return lines

    # ---- machine ----
    def operation(self, op: BOperation) -> list[str]:
        unit = self.unit
        header = op.name + (f"({', '.join(op.params)})" if op.params else "")
        if op.outputs:
            header = f"{', '.join(op.outputs)} {self.sym('<--')} {header}"
        lines = [f"{unit}{header} ="]
        if op.precondition is not None:
            lines.append(f"{unit}PRE")
            parts = op.precondition.parts if isinstance(op.precondition, PAnd) else (op.precondition,)
            lines.extend(self.conjunct_lines(parts, 2))
            lines.append(f"{unit}THEN")
        else:
            lines.append(f"{unit}BEGIN")
        lines.extend(self.sub(op.body, 2))
        lines.append(f"{unit}END")
        return lines

    def machine(self, m: BMachine) -> str:
        unit = self.unit
        clauses: list[list[str]] = [[f"MACHINE {m.name}"]]
        if m.sets:
            entries = [f"{unit}{name} = {{{', '.join(members)}}}" for name, members in m.sets]
            clauses.append(["SETS", *[e + ";" for e in entries[:-1]], entries[-1]])
        if m.constants:
            clauses.append(["CONSTANTS", f"{unit}{', '.join(m.constants)}"])
        if m.properties:
            clauses.append(["PROPERTIES", *self.conjunct_lines(m.properties, 1)])
        if m.variables:
            clauses.append(["VARIABLES", f"{unit}{', '.join(m.variables)}"])
        if m.invariant:
            clauses.append(["INVARIANT", *self.conjunct_lines(m.invariant, 1)])
        if m.initialisation is not None:
            clauses.append(["INITIALISATION", *self.sub(m.initialisation, 1)])
        if m.operations:
            lines = ["OPERATIONS"]
            for position, op in enumerate(m.operations):
                chunk = self.operation(op)
                if position < len(m.operations) - 1:
                    chunk[-1] += ";"
                    chunk.append("")
                lines.extend(chunk)
            clauses.append(lines)
        clauses.append(["END"])
        return "\n\n".join("\n".join(clause) for clause in clauses) + "\n"


def emit_machine(machine: BMachine, flavor: str | None = None, indent: int | None = None) -> str:
    return BEmitter(flavor, indent).machine(machine)


def render_predicate(pred: Predicate, flavor: str = "ascii") -> str:
    return BEmitter(flavor).pred(pred)


def render_expression(expr: BExpr, flavor: str = "ascii") -> str:
    return BEmitter(flavor).expr(expr)
