"""Sampled closed Legendrian curves in the three-dimensional models."""

import numpy as np
from scipy.interpolate import CubicSpline

# 3-point Gauss-Legendre rule on [0, 1]
_GL_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_W = np.array([5.0, 8.0, 5.0]) / 18.0


class LegendrianCurve:
    """Ordered samples of one or more closed curves.

    Parameters
    ----------
    model : ContactModel
    points : (n, dim) array
        Samples, grouped by component and ordered along each component.
    labels : (n,) int array, optional
        Component label of each sample (default: a single component).
    """

    def __init__(self, model, points, labels=None):
        self.model = model
        self.points = model.check_points(points)
        if labels is None:
            labels = np.zeros(len(self.points), dtype=int)
        self.labels = np.asarray(labels, dtype=int)
        if self.labels.shape != (len(self.points),):
            raise ValueError("labels must have one entry per sample")

    def __len__(self):
        return len(self.points)

    @property
    def n_components(self):
        return len(np.unique(self.labels))

    def components(self):
        """List of (n_i, dim) sample arrays, one per component."""
        return [self.points[self.labels == c] for c in np.unique(self.labels)]

    def _lift(self, pts):
        steps = self.model.chart_difference(np.roll(pts, -1, axis=0), pts)
        lifted = pts[0] + np.concatenate([np.zeros((1, pts.shape[1])), np.cumsum(steps, axis=0)])
        return lifted, steps

    def splines(self):
        """Periodic cubic splines of each component in its chord-length parameter.

        Returns a list of ``(sigma, evaluate)`` where ``evaluate(s, nu)``
        returns the lifted coordinates (``nu = 0``) or their derivative.
        """
        out = []
        for pts in self.components():
            lifted, steps = self._lift(pts)
            seg = np.linalg.norm(steps, axis=1)
            sigma = np.concatenate([[0.0], np.cumsum(seg)])
            L = sigma[-1]
            drift = lifted[-1] - lifted[0]
            base = lifted - np.outer(sigma / L, drift)
            base[-1] = base[0]
            sp = CubicSpline(sigma, base, bc_type="periodic")

            def evaluate(s, nu=0, sp=sp, drift=drift, L=L):
                s = np.asarray(s, dtype=float)
                if nu == 0:
                    return sp(s) + np.multiply.outer(s / L, drift)
                return sp(s, 1) + drift / L
            out.append((sigma, evaluate))
        return out

    def legendrian_residual(self):
        """Largest ``|int_seg alpha(gamma')| / |seg|`` over all segments.

        The curve is interpolated by periodic cubic splines and ``alpha`` is
        integrated along each segment with a 3-point Gauss rule.
        """
        worst = 0.0
        for sigma, evaluate in self.splines():
            a, b = sigma[:-1], sigma[1:]
            s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
            pos = evaluate(s.ravel())
            vel = evaluate(s.ravel(), 1)
            cov = self.model.alpha_covector(pos)
            integrand = np.einsum("ij,ij->i", cov, vel).reshape(s.shape)
            integral = (integrand * _GL_W).sum(axis=1) * (b - a)
            worst = max(worst, float(np.max(np.abs(integral) / (b - a))))
        return worst

    def refined(self, factor=4):
        """Resample each component at ``factor`` times the density (spline)."""
        pts, labels = [], []
        for c, (sigma, evaluate) in enumerate(self.splines()):
            n = (len(sigma) - 1) * factor
            s = np.linspace(0, sigma[-1], n, endpoint=False)
            pts.append(self.model.wrap(self.model.project(evaluate(s))))
            labels.append(np.full(n, c))
        return LegendrianCurve(self.model, np.concatenate(pts), np.concatenate(labels))

    def hausdorff(self, other, chunk=512):
        """Symmetric Hausdorff distance between the closed polylines (chart metric).

        Each sample is compared with the segments of the other curve, so
        two samplings of the same curve differ by O(step^2), not O(step).
        """
        return max(_directed(self.model, self.points, other, chunk),
                   _directed(self.model, other.points, self, chunk))

    def to_text(self, precision=12):
        """Ordered coordinate list, one sample per line: ``label c1 c2 ...``."""
        fmt = f"{{:.{precision}e}}"
        lines = [f"contactlab-curve 1 {self.model.kind} {self.model.sign} {self.model.scale!r}"]
        for lab, p in zip(self.labels, self.points):
            lines.append(" ".join([str(int(lab))] + [fmt.format(v) for v in p]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        from ..manifolds import ContactModel
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        head = rows[0]
        if head[:2] != ["contactlab-curve", "1"]:
            raise ValueError("missing 'contactlab-curve 1' header")
        model = ContactModel(head[2], int(head[3]), float(head[4]))
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(model, data[:, 1:], data[:, 0].astype(int))


def _directed(model, pts, curve, chunk):
    starts, steps = [], []
    for comp in curve.components():
        starts.append(comp)
        steps.append(model.chart_difference(np.roll(comp, -1, axis=0), comp))
    starts, steps = np.concatenate(starts), np.concatenate(steps)
    norm2 = np.maximum(np.einsum("ij,ij->i", steps, steps), 1e-300)
    worst = 0.0
    for i in range(0, len(pts), chunk):
        rel = model.chart_difference(pts[i:i + chunk, None, :], starts[None, :, :])
        s = np.clip(np.einsum("abj,bj->ab", rel, steps) / norm2, 0.0, 1.0)
        d = np.linalg.norm(rel - s[:, :, None] * steps[None], axis=2)
        worst = max(worst, float(d.min(axis=1).max()))
    return worst
