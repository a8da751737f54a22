"""Line-delimited JSON RPC over stdio, the surface language bindings use.

Requests carry an ``id`` echoed in the response plus a ``cmd``:

    {"id": 1, "cmd": "make", "task_id": str | "task_index": int,
     "mode": "human"|"discrete"|"continuous", "config": {...}?}
        -> {"id": 1, "ok": true, "handle": int, "task_id": str,
            "spaces": {...}}
    {"id": 2, "cmd": "reset", "handle": int, "seed": int}
        -> {"id": 2, "ok": true, "observation": {...}}
    {"id": 3, "cmd": "step", "handle": int, "action": {...}}
        -> {"id": 3, "ok": true, "observation": ..., "reward": int,
            "done": bool, "info": {...}}
    {"id": 4, "cmd": "close", "handle": int} -> {"id": 4, "ok": true}
    {"id": 5, "cmd": "tasks"} -> {"id": 5, "ok": true, "tasks": [ids]}
    {"id": 6, "cmd": "shutdown"} -> {"id": 6, "ok": true}   (then exits)

Errors come back as {"id": n, "ok": false, "error": ExceptionName,
"message": str}; the exception name preserves the core diagnostic so
clients can re-raise something meaningful.
"""
from __future__ import annotations

import json
import sys

from .environment import BuilderEnv, EnvConfig
from .errors import GridcraftError
from .protocol import observation_to_json, spaces_descriptor, step_result_to_json
from .tasks import Task, action_from_json


class ServeSession:
    """One RPC session over a pair of text streams."""

    def __init__(self, tasks: list[Task], config: EnvConfig | None = None):
        self._tasks = tasks
        self._by_id = {t.id: t for t in tasks}
        self._base_config = config or EnvConfig()
        self._envs: dict[int, BuilderEnv] = {}
        self._next_handle = 0

    def _env(self, req: dict) -> BuilderEnv:
        handle = req.get("handle")
        if handle not in self._envs:
            raise GridcraftError(f"unknown or closed handle {handle!r}")
        return self._envs[handle]

    def handle_request(self, req: dict) -> dict:
        cmd = req.get("cmd")
        if cmd == "tasks":
            return {"ok": True, "tasks": [t.id for t in self._tasks]}
        if cmd == "make":
            if "task_id" in req:
                task = self._by_id.get(req["task_id"])
                if task is None:
                    raise GridcraftError(f"unknown task id {req['task_id']!r}")
            else:
                task = self._tasks[int(req.get("task_index", 0))]
            mode = req["mode"]
            config = self._base_config
            if req.get("config"):
                config = EnvConfig.from_dict(req["config"])
            handle = self._next_handle
            self._next_handle += 1
            self._envs[handle] = BuilderEnv(config, task=task, mode=mode)
            return {"ok": True, "handle": handle, "task_id": task.id,
                    "spaces": spaces_descriptor(mode)}
        if cmd == "reset":
            env = self._env(req)
            obs = env.reset(seed=int(req.get("seed", 0)))
            return {"ok": True,
                    "observation": observation_to_json(obs, env.config.render)}
        if cmd == "step":
            env = self._env(req)
            result = env.step(action_from_json(req["action"]))
            out = step_result_to_json(result, env.config.render)
            out["ok"] = True
            return out
        if cmd == "close":
            handle = req.get("handle")
            self._envs.pop(handle, None)
            return {"ok": True}
        raise GridcraftError(f"unknown command {cmd!r}")


def serve_loop(tasks: list[Task], config: EnvConfig | None = None,
               stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = ServeSession(tasks, config)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        rid = None
        try:
            req = json.loads(line)
            rid = req.get("id")
            if req.get("cmd") == "shutdown":
                stdout.write(json.dumps({"id": rid, "ok": True}) + "\n")
                stdout.flush()
                return
            resp = session.handle_request(req)
            resp["id"] = rid
        except Exception as exc:   # every fault becomes a structured error
            resp = {"id": rid, "ok": False, "error": type(exc).__name__,
                    "message": str(exc)}
        stdout.write(json.dumps(resp) + "\n")
        stdout.flush()
