#!/usr/bin/env python3
"""Regenerates the scenario files under scenarios/."""
import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
BORESIGHT = {1: -56.0, 2: -28.0, 3: 0.0, 4: 28.0, 5: 56.0}
RANGE_M = 1.0
BASE = {
    "seed": 7,
    "lens_on": True,
    "noise_floor": -70.0,
    "torso_width": 0.5,
    "multipath": True,
    "ghost_probability": 0.02,
    "clutter": [{"range": 0.24, "level_db": -50.0}],
}


def at(az_deg, r=RANGE_M):
    a = math.radians(az_deg)
    return round(r * math.sin(a), 6), round(r * math.cos(a), 6)


def point(t, az):
    x, y = at(az)
    return {"t": t, "x": x, "y": y}


def absent(t):
    return {"t": t, "absent": True}


def fall(zone, fall_t=15.0, duration=None):
    wps = [absent(0.0), point(6.0, BORESIGHT[zone]), point(fall_t, BORESIGHT[zone]), absent(fall_t)]
    return wps


def write(name, waypoints, duration, **extra):
    doc = dict(BASE, waypoints=waypoints, duration=duration, **extra)
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    walk = [absent(0.0), point(6.0, -56.0)]
    t, az = 8.0, -56.0
    while az <= 56.0:
        walk.append(point(t, az))
        t += 0.5
        az += 2.0
    walk.append(point(t + 3.0, 56.0))
    write("walk_1_to_5", walk, round(t + 4.0, 3))

    write("fall_zone1", fall(1), 40.0)
    write("fall_zone3", fall(3), 30.0)
    write("fall_zone5", fall(5), 40.0)

    # Lost in zone 1 at 15 s, back in zone 2 one second before the 20 s timeout.
    handoff = fall(1) + [point(34.0, BORESIGHT[2]), point(40.0, BORESIGHT[2])]
    write("handoff", handoff, 40.0)

    write("empty_room", [absent(0.0)], 20.0)


if __name__ == "__main__":
    main()
