from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator


# ---- expressions ----

class BExpr:
    pass


@dataclass(frozen=True)
class BInt(BExpr):
    value: int


@dataclass(frozen=True)
class BBool(BExpr):
    value: bool


@dataclass(frozen=True)
class BIdent(BExpr):
    name: str


@dataclass(frozen=True)
class BBinOp(BExpr):
    op: str  # + - * / mod
    left: BExpr
    right: BExpr


@dataclass(frozen=True)
class BNeg(BExpr):
    operand: BExpr


@dataclass(frozen=True)
class BApply(BExpr):
    function: BExpr
    arg: BExpr


@dataclass(frozen=True)
class BRecord(BExpr):
    fields: tuple[tuple[str, BExpr], ...]


@dataclass(frozen=True)
class BField(BExpr):
    target: BExpr
    name: str


@dataclass(frozen=True)
class BInterval(BExpr):
    low: BExpr
    high: BExpr


@dataclass(frozen=True)
class BMaplets(BExpr):
    pairs: tuple[tuple[BExpr, BExpr], ...]


@dataclass(frozen=True)
class BConstFunction(BExpr):
    domain: BExpr
    value: BExpr


@dataclass(frozen=True)
class BTotalFunction(BExpr):
    domain: BExpr
    range: BExpr


@dataclass(frozen=True)
class BStructSet(BExpr):
    fields: tuple[tuple[str, BExpr], ...]


@dataclass(frozen=True)
class BBoolOf(BExpr):
    pred: "Predicate"


# ---- predicates ----

class Predicate:
    pass


@dataclass(frozen=True)
class PAnd(Predicate):
    parts: tuple[Predicate, ...]


@dataclass(frozen=True)
class POr(Predicate):
    parts: tuple[Predicate, ...]


@dataclass(frozen=True)
class PNot(Predicate):
    operand: Predicate


@dataclass(frozen=True)
class PImplies(Predicate):
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class PCompare(Predicate):
    op: str  # = /= < <= > >=
    left: BExpr
    right: BExpr


@dataclass(frozen=True)
class PMember(Predicate):
    element: BExpr
    set: BExpr


@dataclass(frozen=True)
class PForAll(Predicate):
    var: str
    body: Predicate


def conjoin(parts) -> Predicate:
    flat: list[Predicate] = []
    for part in parts:
        if isinstance(part, PAnd):
            flat.extend(part.parts)
        else:
            flat.append(part)
    return flat[0] if len(flat) == 1 else PAnd(tuple(flat))


def conjuncts(pred: Predicate | None) -> tuple[Predicate, ...]:
    if pred is None:
        return ()
    if isinstance(pred, PAnd):
        return pred.parts
    return (pred,)


# ---- substitutions ----

class Substitution:
    pass


@dataclass(frozen=True)
class Assign(Substitution):
    name: str
    value: BExpr


@dataclass(frozen=True)
class FunctionOverride(Substitution):
    name: str
    index: BExpr
    value: BExpr


@dataclass(frozen=True)
class If(Substitution):
    branches: tuple[tuple[Predicate, Substitution], ...]
    else_: Substitution | None = None


@dataclass(frozen=True)
class Case(Substitution):
    scrutinee: BExpr
    arms: tuple[tuple[tuple[BExpr, ...], Substitution], ...]
    else_: Substitution | None = None


@dataclass(frozen=True)
class While(Substitution):
    condition: Predicate
    body: Substitution
    invariant: Predicate | None
    variant: BExpr | None


@dataclass(frozen=True)
class Var(Substitution):
    names: tuple[str, ...]
    body: Substitution
    # typing of the locals; used by the interpreter, never emitted
    typing: tuple[Predicate, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Seq(Substitution):
    items: tuple[Substitution, ...]


@dataclass(frozen=True)
class Parallel(Substitution):
    items: tuple[Substitution, ...]


@dataclass(frozen=True)
class Skip(Substitution):
    pass


@dataclass(frozen=True)
class OpCall(Substitution):
    outputs: tuple[BExpr, ...]  # BIdent or BApply(BIdent, index)
    op: str
    args: tuple[BExpr, ...]


def seq(items) -> Substitution:
    flat: list[Substitution] = []
    for item in items:
        if isinstance(item, Seq):
            flat.extend(item.items)
        elif item is not None and not isinstance(item, Skip):
            flat.append(item)
    if not flat:
        return Skip()
    return flat[0] if len(flat) == 1 else Seq(tuple(flat))


# ---- machine ----

@dataclass(frozen=True)
class BOperation:
    name: str
    outputs: tuple[str, ...]
    params: tuple[str, ...]
    precondition: Predicate | None
    body: Substitution
    output_typing: tuple[Predicate, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class BMachine:
    name: str
    sets: tuple[tuple[str, tuple[str, ...]], ...] = ()
    constants: tuple[str, ...] = ()
    properties: tuple[Predicate, ...] = ()
    variables: tuple[str, ...] = ()
    invariant: tuple[Predicate, ...] = ()
    initialisation: Substitution | None = None
    operations: tuple[BOperation, ...] = ()

    def operation(self, name: str) -> BOperation:
        for op in self.operations:
            if op.name == name:
                return op
        raise KeyError(name)


def sub_substitutions(sub: Substitution) -> Iterator[Substitution]:
    if isinstance(sub, If):
        for _, body in sub.branches:
            yield body
        if sub.else_ is not None:
            yield sub.else_
    elif isinstance(sub, Case):
        for _, body in sub.arms:
            yield body
        if sub.else_ is not None:
            yield sub.else_
    elif isinstance(sub, (While, Var)):
        yield sub.body
    elif isinstance(sub, (Seq, Parallel)):
        yield from sub.items


def walk_substitution(sub: Substitution) -> Iterator[Substitution]:
    yield sub
    for child in sub_substitutions(sub):
        yield from walk_substitution(child)


def written_names(sub: Substitution) -> set[str]:
    """Variables a substitution may write, VAR locals excluded."""
    if isinstance(sub, (Assign, FunctionOverride)):
        return {sub.name}
    if isinstance(sub, OpCall):
        names = set()
        for out in sub.outputs:
            target = out.function if isinstance(out, BApply) else out
            if isinstance(target, BIdent):
                names.add(target.name)
        return names
    if isinstance(sub, Var):
        return written_names(sub.body) - set(sub.names)
    names: set[str] = set()
    for child in sub_substitutions(sub):
        names |= written_names(child)
    return names
