"""Random desk-scale instances with a prescribed position of ``C0``."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from .convex import meb
from .geometry import Instance


def random_system(rng, n, m, slack=(0.05, 0.6)):
    """Centers in the unit cube and a radius a bit above the MEB radius.

    ``r > MEB radius`` makes the MEB center an interior point of ``Q``, so
    ``Q`` is nonempty with nonempty interior.
    """
    while True:
        c = rng.uniform(0.0, 1.0, size=(m, n))
        try:
            hull = ConvexHull(c)
        except Exception:
            continue
        if hull.volume > 1e-3:
            break
    _, rad = meb(c)
    return c, float(rad * (1.0 + rng.uniform(*slack)))


def _facet_faces(c):
    hull = ConvexHull(c)
    return [tuple(sorted(s)) for s in hull.simplices]


def random_instance(rng, n, m, case, p=None):
    """Instance with ``C0`` inside, on the boundary of, or outside the hull.

    For ``case='boundary'`` the point is a strictly positive combination of
    ``p`` vertices of one hull facet (``p`` defaults to a random value in
    ``2..n``).
    """
    c, r = random_system(rng, n, m)
    if case == "interior":
        w = rng.dirichlet(np.ones(m) * 2.0)
        c0 = w @ c
    elif case == "boundary":
        faces = _facet_faces(c)
        face = faces[rng.integers(len(faces))]
        p = int(p or rng.integers(2, n + 1))
        sub = list(rng.choice(face, size=p, replace=False))
        w = rng.dirichlet(np.ones(p) * 3.0)
        c0 = w @ c[sub]
    elif case == "outside":
        hull = ConvexHull(c)
        k = rng.integers(len(hull.equations))
        normal = hull.equations[k, :-1]
        face = c[hull.simplices[k]]
        c0 = face.mean(axis=0) + normal * rng.uniform(0.1, 1.5)
    else:
        raise ValueError(f"unknown case {case!r}")
    return Instance.from_arrays(c, r, c0)
