"""Command-line front end (``rcc5 <command> ...``)."""
from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys

from . import algebra, clone, network, ramsey
from .network import InstanceError, ModelVerificationError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3
SEED_LIMIT = 1 << 64


def generate(nvars: int, density: float, seed: int = 0,
             spec: clone.ExpansionSpec | None = None) -> network.Instance:
    """Seeded random instance over an expansion.

    Relations are drawn from the expansion's own relations, or from the five
    basic relations when it adds none.  Each variable pair (and, with ternary
    relations in the pool, each triple) is constrained with probability
    ``density`` in a random argument order.
    """
    if nvars < 1:
        raise InstanceError("need at least one variable")
    if not 0.0 <= density <= 1.0:
        raise InstanceError("density must lie in [0, 1]")
    if not 0 <= seed < SEED_LIMIT:
        raise InstanceError("seed must be a 64-bit unsigned integer")
    spec = spec or clone.BASIC
    pool = list(spec.relations) or [
        network.RelationSpec.binary(1 << i, algebra.BASIC_NAMES[i]) for i in range(5)]
    binary = [r for r in pool if r.arity == 2]
    ternary = [r for r in pool if r.arity == 3]
    rng = random.Random(seed)
    names = [f"v{i}" for i in range(nvars)]
    inst = network.Instance(names)
    for size, rels in ((2, binary), (3, ternary)):
        if not rels:
            continue
        for combo in itertools.combinations(names, size):
            if rng.random() < density:
                rel = rels[rng.randrange(len(rels))]
                args = list(combo)
                rng.shuffle(args)
                inst.constraints.append(network.Constraint(rel, tuple(args)))
    return inst


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc.msg})") from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_solve(args, out) -> int:
    inst = network.instance_from_json(_load_json(args.file))
    pc = network.pc_decide(inst) if args.method in ("pc", "both") else None
    if args.method == "pc":
        print(pc, file=out)
        return EXIT_OK
    res = network.solve(inst)
    if pc == network.REFUTED and res.verdict == network.SAT:
        raise ModelVerificationError("path consistency refuted a satisfiable instance")
    print(res.verdict, file=out)
    if pc is not None:
        print(f"pc: {pc}", file=sys.stderr)
    if res.model is not None:
        text = _dump(network.model_to_json(res.model))
        print(text, file=out)
        if args.model_out:
            _write(args.model_out, text)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    spec = clone.ExpansionSpec.from_json(_load_json(args.spec))
    result = clone.classify(spec, with_wnu=not args.no_wnu)
    print(result.verdict, file=out)
    report = result.dumps()
    if args.report:
        _write(args.report, report)
    else:
        print(report, file=out)
    return EXIT_OK


def cmd_compose(args, out) -> int:
    ordered = args.ordered or any(
        part.strip() in algebra.ORDERED_NAMES[3:] for part in (args.r1 + "," + args.r2).split(","))
    try:
        r1 = algebra.parse_relation(args.r1, ordered)
        r2 = algebra.parse_relation(args.r2, ordered)
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    calc = algebra.ORDERED if ordered else algebra.RCC5
    print(calc.format(calc.compose(r1, r2)), file=out)
    return EXIT_OK


def cmd_amalgamate(args, out) -> int:
    a, b1, b2 = (ramsey.OrderedStructure.from_json(_load_json(p)) for p in (args.a, args.b1, args.b2))
    c = ramsey.amalgamate_one_point(a, b1, b2)
    print(_dump(c.to_json()), file=out)
    return EXIT_OK


def cmd_embed(args, out) -> int:
    s = ramsey.OrderedStructure.from_json(_load_json(args.structure))
    if not ramsey.check_ordered_age(s):
        raise InstanceError("structure is not in the ordered age")
    idx = {p: i for i, p in enumerate(s.points)}
    net = network.AtomicNetwork(
        list(s.points),
        {(idx[x], idx[y]): s.label(x, y) for x, y in itertools.combinations(s.points, 2)})
    model = ramsey.order_realize(s, network.build_model(net))
    emb = ramsey.boolean_embed(s, model)
    print(_dump(emb.rep.to_json(emb.f)), file=out)
    return EXIT_OK


def cmd_independent(args, out) -> int:
    model = network.model_from_json(_load_json(args.model))
    m1, m2 = network.independent_copies(model)
    print(_dump({"copy1": network.model_to_json(m1), "copy2": network.model_to_json(m2)}), file=out)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    spec = clone.ExpansionSpec.from_json(_load_json(args.spec)) if args.spec else None
    inst = generate(args.vars, args.density, args.seed, spec)
    text = _dump(network.instance_to_json(inst))
    if args.out:
        _write(args.out, text)
    else:
        print(text, file=out)
    return EXIT_OK


def cmd_tables(args, out) -> int:
    print(algebra.format_table(ordered=False), file=out)
    print(file=out)
    print(algebra.format_table(ordered=True), file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcc5", description="RCC5 constraint tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide an instance file")
    p.add_argument("file")
    p.add_argument("--method", choices=("pc", "search", "both"), default="search")
    p.add_argument("--model-out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="classify an expansion")
    p.add_argument("spec")
    p.add_argument("--report")
    p.add_argument("--no-wnu", action="store_true", help="skip the WNU cross-check")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("compose", help="compose two relations")
    p.add_argument("r1")
    p.add_argument("r2")
    p.add_argument("--ordered", action="store_true")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("amalgamate", help="one-point amalgamation")
    p.add_argument("a")
    p.add_argument("b1")
    p.add_argument("b2")
    p.set_defaults(func=cmd_amalgamate)

    p = sub.add_parser("embed", help="Boolean algebra embedding of an ordered structure")
    p.add_argument("structure")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("independent", help="two independent copies of a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_independent)

    p = sub.add_parser("gen", help="random instance")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("tables", help="print the composition tables")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args, out)
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (ModelVerificationError, clone.ClassifierAlarm, AssertionError) as exc:
        print(f"internal verification failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InstanceError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
