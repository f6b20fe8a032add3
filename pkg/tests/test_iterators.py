"""All twelve iterators, generated with random operators, run on both sides and
compared with a plain unrolled loop."""
import random
from dataclasses import dataclass
from typing import Callable

import pytest

from scade2b.models.values import ArrayValue
from scade2b.services.pipeline_service import compile_source, resolve_trace, simulate

VARIANTS = [
    "map", "mapi", "mapw", "mapwi",
    "fold", "foldi", "foldw", "foldwi",
    "mapfold", "mapfoldi", "mapfoldw", "mapfoldwi",
]

VALUE_FORMS = [
    ("{p} + {q}", lambda p, q: p + q),
    ("{p} - {q}", lambda p, q: p - q),
    ("{p} * 2 + {q}", lambda p, q: p * 2 + q),
    ("({p} + {q}) * 3", lambda p, q: (p + q) * 3),
]
COND_FORMS = [
    ("{p} < {q}", lambda p, q: p < q),
    ("{p} <= {q}", lambda p, q: p <= q),
    ("{p} >= {q}", lambda p, q: p >= q),
]

Env = dict[str, int]


def _family(variant: str) -> str:
    if variant.startswith("mapfold"):
        return "mapfold"
    return "fold" if variant.startswith("fold") else "map"


@dataclass
class Case:
    variant: str
    size: int
    init_cond: bool
    default: int
    acc0: int
    cond: Callable[[Env], bool]
    step: Callable[[Env], int]
    value: Callable[[Env], int]
    source: str

    @property
    def conditional(self) -> bool:
        return self.variant.rstrip("i").endswith("w")

    @property
    def family(self) -> str:
        return _family(self.variant)


def _form(rng: random.Random, forms, terms: list[str]) -> tuple[str, Callable[[Env], int]]:
    text, fn = rng.choice(forms)
    operands = [rng.choice(terms) for _ in range(2)]
    if operands[0].isdigit():
        operands[0] = "x"

    def read(term: str, env: Env) -> int:
        return int(term) if term.isdigit() else env[term]

    return text.format(p=operands[0], q=operands[1]), lambda env: fn(read(operands[0], env), read(operands[1], env))


def make_case(variant: str, seed: int) -> Case:
    rng = random.Random(f"{variant}-{seed}")
    size = rng.randint(1, 6)
    init_cond = rng.random() < 0.85
    default, acc0 = rng.randint(0, 3), rng.randint(0, 3)
    indexed = variant.endswith("i")
    conditional = variant.rstrip("i").endswith("w")
    family = _family(variant)
    has_acc = family != "map"
    terms = ["x", str(rng.randint(0, 4))] + (["j"] if indexed else []) + (["acc"] if has_acc else [])

    cond_text, cond = _form(rng, COND_FORMS, terms)
    step_text, step = _form(rng, VALUE_FORMS, terms)
    value_text, value = _form(rng, VALUE_FORMS, terms)

    params = (["j: int32"] if indexed else []) + (["acc: int32"] if has_acc else []) + ["x: int32"]
    results, equations = [], []
    if conditional:
        results.append("c: bool")
        equations.append(f"c = {cond_text};")
    if has_acc:
        results.append("acc2: int32")
        equations.append(f"acc2 = {step_text};")
    if family != "fold":
        results.append("y: int32")
        equations.append(f"y = {value_text};")

    outputs, lhs = [], []
    if conditional:
        outputs.append("k: int32")
        lhs.append("k")
    if conditional and family == "mapfold":
        outputs.append("c: bool")
        lhs.append("c")
    if has_acc:
        outputs.append("a: int32")
        lhs.append("a")
    if family != "fold":
        outputs.append(f"y: int32^{size}")
        lhs.append("y")

    head = f"{variant} op <<{size}>>"
    if conditional:
        head += f" if {'true' if init_cond else 'false'}"
        if family != "fold":
            head += f" default {default}"
    args = f"{acc0}, v" if has_acc else "v"
    source = f"""function op({'; '.join(params)}) returns ({'; '.join(results)})
let
  {' '.join(equations)}
tel

node N(v: int32^{size}) returns ({'; '.join(outputs)})
let
  {', '.join(lhs)} = ({head})({args});
tel
"""
    return Case(variant, size, init_cond, default, acc0, cond, step, value, source)


def unrolled(case: Case, xs: tuple[int, ...]) -> dict:
    acc, go, ys, count = case.acc0, case.init_cond if case.conditional else True, [], 0
    for j, x in enumerate(xs):
        if not go:
            break
        env = {"x": x, "j": j, "acc": acc}
        if case.conditional:
            go = case.cond(env)
        if case.family != "fold":
            ys.append(case.value(env))
        if case.family != "map":
            acc = case.step(env)
        count += 1
    expected: dict = {}
    if case.conditional:
        expected["k"] = count
    if case.conditional and case.family == "mapfold":
        expected["c"] = go
    if case.family != "map":
        expected["a"] = acc
    if case.family != "fold":
        expected["y"] = ArrayValue(tuple(ys) + (case.default,) * (len(xs) - count))
    return expected


@pytest.mark.parametrize("seed", range(100))
@pytest.mark.parametrize("variant", VARIANTS)
def test_iterator_matches_unrolled_loop_on_both_sides(variant, seed):
    case = make_case(variant, seed)
    compiled = compile_source(case.source, f"{variant}.scade")
    trace = resolve_trace(compiled, seed=seed, cycles=50, bounds={"v": (-4, 6)})
    report = simulate(compiled, trace)
    assert report.equivalent, (case.source, report.divergence)
    assert report.cycles_compared == 50
    assert report.while_diagnostics == ()
    for record in report.records:
        assert dict(record.scade_outputs) == unrolled(case, record.inputs["v"].cells), case.source


def test_map_addition_example():
    source = """function add(a, b: int32) returns (c: int32)
let
  c = a + b;
tel

node Add(u, w: int32^10) returns (v: int32^10)
let
  v = (map add <<10>>)(u, w);
tel
"""
    compiled = compile_source(source)
    trace = resolve_trace(compiled, "u=[0,1,2,3,4,5,6,7,8,9] w=[1,2,3,4,5,6,7,8,9,10]\n")
    report = simulate(compiled, trace)
    assert report.equivalent
    (record,) = report.records
    expected = ArrayValue((1, 3, 5, 7, 9, 11, 13, 15, 17, 19))
    assert record.scade_outputs["v"] == expected
    assert record.b_outputs["v"] == expected
