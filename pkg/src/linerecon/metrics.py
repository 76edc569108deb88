"""Accuracy of a reconstructed line spectrum against ground truth.

Lines are paired by a greedy nearest-frequency rule.  Lines without a partner
are compared against a zero-intensity entry, which contributes to the
intensity error but not to the frequency error.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = ["MetricsReport", "match_lines", "compute_metrics", "evaluate_lines"]


@dataclass(frozen=True)
class MetricsReport:
    eps: float
    xi: float
    eps_rel: float
    xi_rel: float
    zeta_rel: float
    matching: tuple

    def to_dict(self):
        return {
            "eps": self.eps,
            "xi": self.xi,
            "eps_rel": self.eps_rel,
            "xi_rel": self.xi_rel,
            "zeta_rel": self.zeta_rel,
            "matching": [list(pair) for pair in self.matching],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                float(d["eps"]),
                float(d["xi"]),
                float(d["eps_rel"]),
                float(d["xi_rel"]),
                float(d["zeta_rel"]),
                tuple(tuple(p) for p in d["matching"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed metrics report: {exc}") from exc


def match_lines(recon, truth, window):
    """Greedy nearest-frequency pairing.

    Truth lines, tallest first, each claim the closest unclaimed reconstructed
    line within ``window``.  Returns a list of ``(truth_index, recon_index)``
    where either side may be ``None``: unmatched truth lines first appear in
    truth order, then unmatched reconstructed lines.
    """
    if not window > 0:
        raise DataError(f"matching window must be positive, got {window}")
    tf, tz = truth.frequencies, truth.intensities
    rf = recon.frequencies
    claimed = set()
    partner = {}
    for i in sorted(range(len(tf)), key=lambda i: (-tz[i], tf[i])):
        best, best_d = None, math.inf
        for j in range(len(rf)):
            d = abs(rf[j] - tf[i])
            if j not in claimed and d <= window and d < best_d:
                best, best_d = j, d
        if best is not None:
            claimed.add(best)
            partner[i] = best
    pairs = [(i, partner.get(i)) for i in range(len(tf))]
    pairs += [(None, j) for j in range(len(rf)) if j not in claimed]
    return pairs


def compute_metrics(matching, recon, truth):
    """RMSE and relative errors of intensities and frequencies.

    ``eps`` and ``xi`` are root-mean-square errors over all pairs (padded ones
    included); the relative errors divide 2-norms of the differences by the
    2-norms of the truth vectors.  A zero truth norm gives ``nan``.
    """
    if len(truth) == 0:
        raise DataError("relative errors are undefined for an empty truth spectrum")
    tf, tz = truth.frequencies, truth.intensities
    rf, rz = recon.frequencies, recon.intensities
    z_true, z_rec, f_true, f_rec = [], [], [], []
    for i, j in matching:
        z_true.append(tz[i] if i is not None else 0.0)
        z_rec.append(rz[j] if j is not None else 0.0)
        if i is not None and j is not None:
            f_true.append(tf[i])
            f_rec.append(rf[j])
        elif i is not None:
            f_true.append(tf[i])
            f_rec.append(tf[i])
        else:
            # a spurious line has no true position; it only contributes to the norm
            f_true.append(rf[j])
            f_rec.append(rf[j])
    z_true, z_rec = np.array(z_true), np.array(z_rec)
    f_true, f_rec = np.array(f_true), np.array(f_rec)
    n = len(matching)
    dz = np.linalg.norm(z_rec - z_true)
    df = np.linalg.norm(f_rec - f_true)
    eps = float(dz / math.sqrt(n))
    xi = float(df / math.sqrt(n))
    nz, nf = np.linalg.norm(tz), np.linalg.norm(tf)
    eps_rel = float(dz / nz) if nz > 0 else math.nan
    xi_rel = float(df / nf) if nf > 0 else math.nan
    zeta_rel = math.sqrt(eps_rel ** 2 + xi_rel ** 2)
    return MetricsReport(eps, xi, eps_rel, xi_rel, zeta_rel, tuple(tuple(p) for p in matching))


def evaluate_lines(recon, truth, window):
    """``compute_metrics`` after ``match_lines``."""
    return compute_metrics(match_lines(recon, truth, window), recon, truth)
