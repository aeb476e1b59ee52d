"""Writes data/solar_system_sample.json: Sun and eight planets (Earth-Moon
barycentre as one body) from approximate J2000 mean elements, barycentric,
ecliptic frame, AU and days, gm in AU^3/day^2."""

import json
import math
import pathlib

K_GAUSS = 0.01720209895
GM_SUN = K_GAUSS**2

# a [AU], e, I, L, varpi, Omega [deg], inverse mass ratio
ELEMENTS = [
    ("mercury", 0.38709927, 0.20563593, 7.00497902, 252.25032350, 77.45779628, 48.33076593, 6023600.0),
    ("venus", 0.72333566, 0.00677672, 3.39467605, 181.97909950, 131.60246718, 76.67984255, 408523.71),
    ("earth-moon", 1.00000261, 0.01671123, -0.00001531, 100.46457166, 102.93768193, 0.0, 328900.56),
    ("mars", 1.52371034, 0.09339410, 1.84969142, -4.55343205, -23.94362959, 49.55953891, 3098708.0),
    ("jupiter", 5.20288700, 0.04838624, 1.30439695, 34.39644051, 14.72847983, 100.47390909, 1047.3486),
    ("saturn", 9.53667594, 0.05386179, 2.48599187, 49.95424423, 92.59887831, 113.66242448, 3497.898),
    ("uranus", 19.18916464, 0.04725744, 0.77263783, 313.23810451, 170.95427630, 74.01692503, 22902.98),
    ("neptune", 30.06992276, 0.00859048, 1.77004347, -55.12002969, 44.96476227, 131.78422574, 19412.24),
]


def kepler(M, e):
    E = M if e < 0.8 else math.pi
    for _ in range(50):
        dE = (E - e * math.sin(E) - M) / (1 - e * math.cos(E))
        E -= dE
        if abs(dE) < 1e-15:
            break
    return E


def state(a, e, inc, L, varpi, node, mu):
    inc, L, varpi, node = (math.radians(x) for x in (inc, L, varpi, node))
    w = varpi - node
    M = math.remainder(L - varpi, 2 * math.pi)
    E = kepler(M, e)
    n = math.sqrt(mu / a**3)
    x, y = a * (math.cos(E) - e), a * math.sqrt(1 - e * e) * math.sin(E)
    edot = n / (1 - e * math.cos(E))
    vx, vy = -a * math.sin(E) * edot, a * math.sqrt(1 - e * e) * math.cos(E) * edot
    cw, sw, cO, sO, ci, si = (math.cos(w), math.sin(w), math.cos(node), math.sin(node),
                              math.cos(inc), math.sin(inc))
    R = [
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci],
        [sw * si, cw * si],
    ]
    return ([R[r][0] * x + R[r][1] * y for r in range(3)],
            [R[r][0] * vx + R[r][1] * vy for r in range(3)])


def main():
    bodies = [{"label": "sun", "gm": GM_SUN, "q": [0.0] * 3, "v": [0.0] * 3}]
    for name, a, e, inc, L, varpi, node, ratio in ELEMENTS:
        gm = GM_SUN / ratio
        q, v = state(a, e, inc, L, varpi, node, GM_SUN + gm)
        bodies.append({"label": name, "gm": gm, "q": q, "v": v})
    total = sum(b["gm"] for b in bodies)
    for key in ("q", "v"):
        cm = [sum(b["gm"] * b[key][d] for b in bodies) / total for d in range(3)]
        for b in bodies:
            b[key] = [b[key][d] - cm[d] for d in range(3)]
    doc = {
        "name": "solar-system-sample",
        "units": "AU, day, gm in AU^3/day^2",
        "G": 1.0,
        "t_span": [0.0, 2000.0],
        "bodies": bodies,
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "solar_system_sample.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
