"""Primal/dual norm pairs on R^d and projections onto dual-norm balls."""

import numpy as np

from .errors import InvalidArgumentError

_DUAL_OF = {"l2": "l2", "l1": "linf", "linf": "l1"}


class NormPair:
    """A primal norm tag together with the derived dual norm.

    Estimation errors are measured in the primal norm; test directions are
    constrained to a ball of the dual norm.  Supported primal tags are ``l2``
    (self-dual), ``l1`` (dual ``linf``) and ``linf`` (dual ``l1``).
    """

    __slots__ = ("primal", "dual")

    def __init__(self, primal="l2"):
        tag = str(primal).lower()
        if tag not in _DUAL_OF:
            raise InvalidArgumentError(
                f"unsupported norm {primal!r}; expected one of {sorted(_DUAL_OF)}"
            )
        self.primal = tag
        self.dual = _DUAL_OF[tag]

    def __repr__(self):
        return f"NormPair({self.primal!r})"

    def __eq__(self, other):
        return isinstance(other, NormPair) and other.primal == self.primal

    def __hash__(self):
        return hash(("NormPair", self.primal))

    def primal_norm(self, x):
        return _norm(np.asarray(x, dtype=float), self.primal)

    def dual_norm(self, w):
        return _norm(np.asarray(w, dtype=float), self.dual)

    def project_dual(self, w, radius):
        """Project onto the dual-norm ball of the given radius.

        Accepts a single vector or a stack of row vectors.
        """
        w = np.asarray(w, dtype=float)
        if radius < 0:
            raise InvalidArgumentError("radius must be nonnegative")
        single = w.ndim == 1
        rows = np.atleast_2d(w).copy()
        if self.dual == "l2":
            norms = np.linalg.norm(rows, axis=1)
            big = norms > radius
            if np.any(big):
                rows[big] *= (radius / norms[big])[:, None]
        elif self.dual == "linf":
            np.clip(rows, -radius, radius, out=rows)
        else:
            for i in range(rows.shape[0]):
                rows[i] = _project_l1(rows[i], radius)
        return rows[0] if single else rows

    def dual_ball_support(self, v, radius):
        """A maximizer of <w, v> over the dual ball of the given radius.

        The attained value is ``radius * primal_norm(v)``.
        """
        v = np.asarray(v, dtype=float)
        if v.ndim != 1:
            raise InvalidArgumentError("expected a single vector")
        if not np.any(v):
            return np.zeros_like(v)
        if self.dual == "l2":
            return radius * v / np.linalg.norm(v)
        if self.dual == "linf":
            return radius * np.sign(v)
        w = np.zeros_like(v)
        i = int(np.argmax(np.abs(v)))
        w[i] = radius * np.sign(v[i])
        return w


def _norm(x, tag):
    if x.ndim <= 1:
        if tag == "l2":
            return float(np.linalg.norm(x))
        if tag == "l1":
            return float(np.sum(np.abs(x)))
        return float(np.max(np.abs(x))) if x.size else 0.0
    if tag == "l2":
        return np.linalg.norm(x, axis=-1)
    if tag == "l1":
        return np.sum(np.abs(x), axis=-1)
    return np.max(np.abs(x), axis=-1)


def _project_l1(w, radius):
    a = np.abs(w)
    if a.sum() <= radius:
        return w
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(u) + 1)
    k = np.nonzero(u * idx > (css - radius))[0][-1]
    tau = (css[k] - radius) / (k + 1.0)
    return np.sign(w) * np.maximum(a - tau, 0.0)
