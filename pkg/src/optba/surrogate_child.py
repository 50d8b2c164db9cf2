"""Reference evaluator child: serves a built-in surface over the line protocol.

    python -m optba.surrogate_child                      # default epochs/units surface
    python -m optba.surrogate_child '{"kind": "rastrigin_int", "shift": {...}}' space.json

A real trainer replaces the body of ``evaluate`` with model training and
returns validation accuracy.
"""

import json
import sys

from .external import HANDSHAKE, encode_response
from .objectives import DEFAULT_SPACE, ObjectiveSpec, build_objective
from .space import ParamSpace


def serve(evaluate, names, stdin=sys.stdin, stdout=sys.stdout):
    stdout.write(json.dumps(HANDSHAKE, separators=(",", ":")) + "\n")
    stdout.flush()
    for line in stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        rid = req["id"]
        try:
            values = tuple(int(req["params"][n]) for n in names)
            reply = encode_response(rid, fitness=evaluate(values))
        except Exception as exc:  # reported to the parent, never fatal here
            reply = encode_response(rid, error=f"{type(exc).__name__}: {exc}")
        stdout.write(reply)
        stdout.flush()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    spec = ObjectiveSpec.from_json(json.loads(argv[0]) if argv else {})
    space = DEFAULT_SPACE
    if len(argv) > 1:
        with open(argv[1]) as fh:
            space = ParamSpace.from_json(json.load(fh))
    spec.memoize = False
    objective = build_objective(spec, space)
    serve(lambda v: objective(v), space.names)


if __name__ == "__main__":
    main()
