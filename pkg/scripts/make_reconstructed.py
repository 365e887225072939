"""Author the reconstructed broadcast benchmarks in src/prepair/corpus.

Only the sizes of the original models (local states, actions, edges) are
known, so each one is written here from a short protocol description.
Receives not listed explicitly are self-loops; ``alt`` entries add a second,
faulty receive option that repair has to rule out.
"""

from __future__ import annotations

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "prepair" / "corpus"


def build(bench: dict) -> dict:
    states = bench["states"]
    trs = []
    mark = {"bsend": "!!", "brecv": "??"}

    def edge(src, act, d, dst):
        return {"id": f"({src},{act}{mark[d]},{dst})", "from": src, "action": act, "dir": d, "to": dst}

    for act, (src, dst) in bench["sends"].items():
        trs.append(edge(src, act, "bsend", dst))
    for act in bench["sends"]:
        moves = bench["recv"].get(act, {})
        alts = bench.get("alt", {}).get(act, {})
        for q in states:
            # the faulty option comes first, so the default decision order tries it first
            if q in alts:
                trs.append(edge(q, act, "brecv", alts[q]))
            trs.append(edge(q, act, "brecv", moves.get(q, q)))
    for src, name, dst in bench["tau"]:
        trs.append({"id": f"({src},{name},{dst})", "from": src, "dir": "tau", "to": dst})
    s, a, e = bench["size"]
    assert (len(states), len(bench["sends"]), len(trs)) == (s, a, e), (bench["name"], len(states), len(trs))

    def cfg(d):
        return {"counts": d}

    doc = {
        "name": bench["name"],
        "description": bench["description"],
        "reconstructed": True,
        "kind": "broadcast",
        "templates": [{"role": "B", "states": states, "init": bench["init"], "transitions": trs}],
        "errors": [cfg(d) for d in bench["C"]],
        # every protocol action stays available; repair only chooses among receive options
        "constraints": {"one_hot_receive": True, "keep_tau": True,
                        "extra": ["(and " + " ".join(f"|{t['id']}|" for t in trs if t["dir"] == "bsend") + ")"]},
    }
    parts = {k: [cfg(d) for d in bench[k]] for k in ("P1", "P2") if k in bench}
    if parts:
        doc["partial_errors"] = parts
    return doc


SMOKE = {
    "name": "smoke-detector",
    "description": "Networked smoke detectors: a detector that senses smoke raises the alarm everywhere; "
                   "an alarm can be muted and later cleared. Reconstructed stand-in: only the state, action and edge counts follow the original benchmark.",
    "size": (6, 5, 39),
    "states": ["idle", "sensing", "alarm", "muted", "testing", "fault"],
    "init": "idle",
    "sends": {
        "smoke": ("sensing", "alarm"),
        "mute": ("alarm", "muted"),
        "clear": ("muted", "idle"),
        "selftest": ("idle", "testing"),
        "fail": ("testing", "fault"),
    },
    "recv": {
        "smoke": {"idle": "alarm", "sensing": "alarm", "muted": "alarm", "testing": "alarm"},
        "mute": {"alarm": "muted"},
        "clear": {"muted": "idle", "alarm": "idle"},
    },
    "alt": {"smoke": {"muted": "muted"}, "mute": {"alarm": "alarm"}},
    "tau": [("idle", "sense", "sensing"), ("testing", "done", "idle")],
    "C": [{"alarm": 1, "muted": 1}, {"alarm": 1, "idle": 1}],
}

TRACKER = {
    "name": "two-object-tracker",
    "description": "Sensor network tracking two objects: nodes detect an object, one node per object becomes "
                   "its tracker and hands it over when the object moves. Reconstructed stand-in: only the state, action and edge counts follow the original benchmark.",
    "size": (12, 8, 128),
    "states": ["idle", "seeA", "seeB", "trackA", "trackB", "handA", "handB", "lostA", "lostB", "sleep", "wake",
               "report"],
    "init": "idle",
    "sends": {
        "claimA": ("seeA", "trackA"),
        "claimB": ("seeB", "trackB"),
        "handoffA": ("trackA", "handA"),
        "handoffB": ("trackB", "handB"),
        "ping": ("wake", "report"),
        "collect": ("report", "idle"),
        "lose": ("lostA", "idle"),
        "nap": ("idle", "sleep"),
    },
    "recv": {
        "claimA": {"seeA": "idle", "trackA": "idle", "handA": "idle"},
        "claimB": {"seeB": "idle", "trackB": "idle", "handB": "idle"},
        "handoffA": {"seeA": "lostA"},
        "handoffB": {"seeB": "lostB"},
        "ping": {"sleep": "wake"},
        "collect": {"wake": "idle", "handA": "idle", "handB": "idle"},
        "lose": {"lostA": "seeA", "lostB": "seeB"},
        "nap": {"wake": "sleep"},
    },
    "alt": {
        "claimA": {"seeA": "trackA", "trackA": "trackA", "handA": "trackA"},
        "claimB": {"seeB": "trackB", "trackB": "trackB", "handB": "trackB"},
        "handoffA": {"seeA": "trackA", "lostA": "trackA"},
        "handoffB": {"seeB": "trackB", "lostB": "trackB"},
        "collect": {"handA": "trackA", "handB": "trackB"},
        "lose": {"lostA": "trackA", "lostB": "trackB"},
    },
    "tau": [("idle", "detectA", "seeA"), ("idle", "detectB", "seeB"), ("seeA", "fadeA", "idle"),
            ("seeB", "fadeB", "idle"), ("handA", "doneA", "idle"), ("handB", "doneB", "idle"),
            ("sleep", "alarm", "wake"), ("wake", "doze", "sleep"),
            ("trackA", "moveA", "handA"), ("trackB", "moveB", "handB")],
    "C": [{"trackA": 2}, {"trackB": 2}],
    "P1": [{"trackA": 2}],
    "P2": [{"trackB": 2}],
}

FLOCK = {
    "name": "robot-flocking",
    "description": "Robots moving as a flock: one leader picks the heading, followers align to it, and the "
                   "leader role is handed over on request. Reconstructed stand-in: only the state, action and edge counts follow the original benchmark.",
    "size": (10, 10, 147),
    "states": ["wander", "follow", "leader", "north", "south", "east", "west", "stop", "candidate", "handover"],
    "init": "wander",
    "sends": {
        "lead": ("candidate", "leader"),
        "goN": ("leader", "north"),
        "goS": ("leader", "south"),
        "goE": ("leader", "east"),
        "goW": ("leader", "west"),
        "halt": ("north", "stop"),
        "resume": ("stop", "follow"),
        "yield": ("handover", "follow"),
        "join": ("wander", "follow"),
        "claim": ("follow", "candidate"),
    },
    "recv": {
        "lead": {"candidate": "follow", "wander": "follow", "leader": "follow", "handover": "follow"},
        "goN": {"follow": "north", "south": "north", "east": "north", "west": "north"},
        "goS": {"follow": "south", "north": "south", "east": "south", "west": "south"},
        "goE": {"follow": "east", "north": "east", "south": "east", "west": "east"},
        "goW": {"follow": "west", "north": "west", "south": "west", "east": "west"},
        "halt": {"north": "stop", "south": "stop", "east": "stop", "west": "stop"},
        "resume": {"stop": "follow"},
        "yield": {"candidate": "leader", "follow": "follow"},
        "join": {},
        "claim": {"candidate": "follow"},
    },
    "alt": {
        "lead": {"candidate": "leader", "leader": "leader", "handover": "leader", "wander": "wander"},
        "goN": {"south": "south", "east": "east", "west": "west"},
        "goS": {"north": "north", "east": "east", "west": "west"},
        "goE": {"north": "north", "south": "south", "west": "west"},
        "goW": {"north": "north", "south": "south", "east": "east"},
        "halt": {"south": "south", "east": "east", "west": "west"},
        "resume": {"stop": "stop"},
        "yield": {"candidate": "candidate", "follow": "leader"},
        "claim": {"candidate": "candidate"},
    },
    "tau": [("north", "drift", "south"), ("south", "drift", "north"), ("east", "drift", "west"),
            ("west", "drift", "east"), ("leader", "tire", "handover"), ("follow", "stray", "wander"),
            ("candidate", "retract", "follow"), ("north", "rest", "stop"), ("south", "rest", "stop"), ("east", "rest", "stop"), ("west", "rest", "stop"),
            ("leader", "rest", "stop"), ("handover", "cancel", "leader"), ("stop", "wake", "follow")],
    "C": [{"leader": 2}, {"leader": 1, "handover": 1}, {"handover": 2}],
    "P1": [{"leader": 2}, {"leader": 1, "handover": 1}],
    "P2": [{"handover": 2}, {"leader": 1, "handover": 1}],
}

LOCK = {
    "name": "lock-service",
    "description": "Coarse-grained lock service: replicas elect a master, clients acquire and release a lock "
                   "through it, and an expired lease is revoked. Reconstructed stand-in: only the state, action and edge counts follow the original benchmark.",
    "size": (10, 8, 95),
    "states": ["replica", "candidate", "master", "client", "waiting", "holder", "releasing", "expired",
               "recovering", "standby"],
    "init": "replica",
    "sends": {
        "elect": ("candidate", "master"),
        "request": ("client", "waiting"),
        "acquire": ("waiting", "holder"),
        "release": ("holder", "releasing"),
        "ack": ("releasing", "client"),
        "expire": ("master", "recovering"),
        "revoke": ("recovering", "master"),
        "retire": ("standby", "replica"),
    },
    "recv": {
        "elect": {"candidate": "replica", "master": "standby"},
        "acquire": {"holder": "expired"},
        "expire": {"holder": "expired", "waiting": "client"},
        "revoke": {"expired": "client", "recovering": "standby", "master": "standby"},
        "retire": {"standby": "replica"},
    },
    "alt": {
        "elect": {"candidate": "master"},
        "acquire": {"waiting": "holder"},
        "expire": {"holder": "holder"},
        "revoke": {"expired": "holder"},
        "release": {"expired": "holder"},
    },
    "tau": [("replica", "campaign", "candidate"), ("replica", "connect", "client")],
    "C": [{"master": 2}, {"holder": 2}],
    "P1": [{"master": 2}],
}

for bench in (SMOKE, TRACKER, FLOCK, LOCK):
    doc = build(bench)
    path = OUT / (bench["name"].replace("-", "_") + ".json")
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print(path.name, bench["size"])
