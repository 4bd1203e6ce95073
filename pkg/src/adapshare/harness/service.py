"""Line-delimited JSON allocation service over TCP.

One request object per line; the response is the loaded policy's
projected allocation for the supplied demand history. Malformed lines
get an error object and the connection stays open. The policy is
loaded once and never mutated while serving.
"""

import json
import socketserver
import threading

import numpy as np

from ..agents import load_agent
from ..env import Observation, objective_j, project_action


class CheckpointInvalid(ValueError):
    """Checkpoint file missing, malformed, or not an agent checkpoint."""


class MalformedRequest(ValueError):
    """Request line failed parsing or validation."""


def _parse_request(line, window_n):
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRequest(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedRequest("request must be an object")
    for key in ("demand_history", "n_r", "zeta"):
        if key not in payload:
            raise MalformedRequest(f"missing field {key!r}")
    history = payload["demand_history"]
    if not isinstance(history, list) or len(history) < window_n + 1:
        raise MalformedRequest(
            f"demand_history must list at least {window_n + 1} (d_a, d_b) pairs, newest first"
        )
    try:
        pairs = np.asarray(history, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedRequest(f"demand_history entries must be numeric pairs: {exc}") from exc
    if pairs.ndim != 2 or pairs.shape[1] != 2 or not np.isfinite(pairs).all() or (pairs < 0).any():
        raise MalformedRequest("demand_history entries must be finite nonnegative pairs")
    try:
        n_r = float(payload["n_r"])
        zeta = float(payload["zeta"])
    except (TypeError, ValueError) as exc:
        raise MalformedRequest(f"n_r and zeta must be numbers: {exc}") from exc
    if not np.isfinite(n_r) or n_r <= 0:
        raise MalformedRequest(f"n_r must be positive, got {payload['n_r']!r}")
    if not 0.0 <= zeta <= 1.0:
        raise MalformedRequest(f"zeta must lie in [0, 1], got {payload['zeta']!r}")
    return pairs[: window_n + 1], n_r, zeta


class AllocationHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                response = server.answer(line)
            except MalformedRequest as exc:
                response = {"error": str(exc)}
            self.wfile.write((json.dumps(response) + "\n").encode("utf-8"))
            self.wfile.flush()


class AllocationServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, bind, agent, experiment):
        self.agent = agent
        self.experiment = experiment
        super().__init__(bind, AllocationHandler)

    def answer(self, line):
        env = self.experiment.env
        pairs, n_r, zeta = _parse_request(line, env.window_n)
        obs = Observation(pairs=pairs / env.capacity_norm)
        raw = self.agent.act(obs, explore=False)
        alloc = project_action(raw, n_r)
        current = (float(pairs[0, 0]), float(pairs[0, 1]))
        j = objective_j(alloc, current, zeta, env.d_min)
        return {"n_a": alloc.n_a, "n_b": alloc.n_b, "j_estimate": j}


def start_server(checkpoint, host="127.0.0.1", port=0):
    """Load a checkpoint and return a bound (not yet serving) server."""
    try:
        agent, experiment = load_agent(checkpoint)
    except (OSError, ValueError, KeyError) as exc:
        raise CheckpointInvalid(f"cannot load {checkpoint}: {exc}") from exc
    try:
        return AllocationServer((host, port), agent, experiment)
    except OSError as exc:
        raise OSError(f"cannot bind {host}:{port}: {exc}") from exc


def serve(checkpoint, host="127.0.0.1", port=7447):
    """Serve allocations until interrupted; blocks the calling thread."""
    server = start_server(checkpoint, host, port)
    bound = server.server_address
    print(f"serving {checkpoint} on {bound[0]}:{bound[1]}")
    try:
        server.serve_forever()
    finally:
        server.server_close()


def serve_in_thread(checkpoint, host="127.0.0.1", port=0):
    """Test helper: returns (server, thread); caller shuts the server down."""
    server = start_server(checkpoint, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
