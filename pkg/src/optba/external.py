"""Evaluate fitness in a long-lived child process over newline-delimited JSON.

Wire format (one UTF-8 JSON object per line on the child's stdin/stdout)::

    child  -> {"protocol":"optba-eval","version":1}          # once, on startup
    parent -> {"id":7,"params":{"epochs":49,"units":108}}
    child  -> {"id":7,"fitness":0.9963}   or   {"id":7,"error":"..."}

Several requests may be in flight; responses are matched by id, so the child
may answer out of order.  Diagnostics belong on the child's stderr.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from concurrent.futures import Future
from concurrent.futures import TimeoutError as FutureTimeout

from .errors import ChildExited, ObjectiveFailure, ProtocolError, EvalTimeout
from .objectives import Objective

HANDSHAKE = {"protocol": "optba-eval", "version": 1}


def encode_request(eval_id: int, params: dict) -> str:
    return json.dumps({"id": int(eval_id), "params": params}, separators=(",", ":")) + "\n"


def encode_response(eval_id: int, fitness=None, error=None) -> str:
    msg = {"id": int(eval_id)}
    if error is not None:
        msg["error"] = str(error)
    else:
        msg["fitness"] = fitness
    return json.dumps(msg, separators=(",", ":")) + "\n"


def parse_response(line: str):
    """Decode one response line into ``(id, fitness, error)``.

    Raises ProtocolError for anything that is not a well-formed response with
    a finite numeric fitness or a string error.
    """
    try:
        msg = json.loads(line)
    except ValueError:
        raise ProtocolError(f"malformed response line: {line.strip()[:200]!r}") from None
    if not isinstance(msg, dict):
        raise ProtocolError(f"response is not a JSON object: {line.strip()[:200]!r}")
    rid = msg.get("id")
    if isinstance(rid, bool) or not isinstance(rid, int) or rid < 0:
        raise ProtocolError(f"response id must be an unsigned integer: {line.strip()[:200]!r}")
    if "error" in msg:
        return rid, None, str(msg["error"])
    fit = msg.get("fitness")
    if isinstance(fit, bool) or not isinstance(fit, (int, float)) or not math.isfinite(fit):
        return rid, ProtocolError(f"id {rid}: fitness must be a finite number, got {fit!r}", eval_id=rid), None
    return rid, float(fit), None


class ExternalEvaluator(Objective):
    """Objective backed by a child process speaking the line protocol.

    The child is spawned lazily on first use (or via :meth:`start`) and kept
    for the evaluator's lifetime.  Safe to call from several threads at once.
    """

    name = "external"
    deterministic = False

    def __init__(self, command, names, timeout: float = 60.0, startup_timeout: float | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.names = tuple(names)
        self.timeout = float(timeout)
        self.startup_timeout = float(startup_timeout if startup_timeout is not None else max(timeout, 10.0))
        self._proc = None
        self._reader = None
        self._pending: dict[int, Future] = {}
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._handshake: Future | None = None
        self._dead: ObjectiveFailure | None = None

    def start(self):
        with self._lock:
            if self._proc is not None:
                return
            try:
                self._proc = subprocess.Popen(
                    self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                    text=True, encoding="utf-8", bufsize=1,
                )
            except OSError as exc:
                self._dead = ChildExited(f"could not start {self.command!r}: {exc}")
                raise self._dead from exc
            self._handshake = Future()
            self._reader = threading.Thread(target=self._read_loop, name="optba-eval-reader", daemon=True)
            self._reader.start()
        try:
            self._handshake.result(self.startup_timeout)
        except FutureTimeout:
            self.close()
            raise EvalTimeout(f"no handshake from {self.command!r} within {self.startup_timeout}s") from None

    def _fail_all(self, exc: ObjectiveFailure):
        with self._lock:
            if self._dead is None:
                self._dead = exc
            pending, self._pending = self._pending, {}
        if self._handshake is not None and not self._handshake.done():
            self._handshake.set_exception(exc)
        for fut in pending.values():
            if not fut.done():
                fut.set_exception(exc)

    def _read_loop(self):
        stream = self._proc.stdout
        first = True
        for line in stream:
            if not line.strip():
                continue
            if first:
                first = False
                try:
                    msg = json.loads(line)
                except ValueError:
                    msg = None
                if msg != HANDSHAKE:
                    self._fail_all(ProtocolError(f"bad handshake: {line.strip()[:200]!r}"))
                    return
                self._handshake.set_result(True)
                continue
            try:
                rid, fitness, error = parse_response(line)
            except ProtocolError as exc:
                self._fail_all(exc)
                return
            with self._lock:
                fut = self._pending.pop(rid, None)
            if fut is None:
                self._fail_all(ProtocolError(f"response id {rid} matches no outstanding request"))
                return
            if error is not None:
                fut.set_exception(ObjectiveFailure(f"child reported error for id {rid}: {error}", eval_id=rid))
            elif isinstance(fitness, ProtocolError):
                fut.set_exception(fitness)
            else:
                fut.set_result(fitness)
        code = self._proc.wait()
        self._fail_all(ChildExited(f"evaluator process exited with status {code}"))

    def __call__(self, values, eval_id: int = 0) -> float:
        if self._proc is None:
            self.start()
        params = dict(zip(self.names, (int(v) for v in values)))
        fut = Future()
        with self._lock:
            if self._dead is not None:
                raise type(self._dead)(str(self._dead), params=params, eval_id=eval_id)
            if eval_id in self._pending:
                raise ProtocolError(f"request id {eval_id} already in flight")
            self._pending[eval_id] = fut
        try:
            with self._write_lock:
                self._proc.stdin.write(encode_request(eval_id, params))
                self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            # the reader thread will observe EOF and fail the future with ChildExited
            pass
        try:
            return fut.result(self.timeout)
        except FutureTimeout:
            with self._lock:
                self._pending.pop(eval_id, None)
            raise EvalTimeout(f"evaluation {eval_id} exceeded {self.timeout}s", params=params, eval_id=eval_id) from None
        except ObjectiveFailure as exc:
            if exc.params is None:
                exc = type(exc)(str(exc), params=params, eval_id=eval_id)
            raise exc from None

    def close(self):
        proc = self._proc
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if self._reader is not None:
            self._reader.join(timeout=2.0)
        if proc.stdout is not None:
            proc.stdout.close()
