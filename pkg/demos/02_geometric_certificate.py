"""
Checking the incoherence-versus-inradius condition
==================================================

For each subspace we compute the dual directions of its points, the largest
inner product between those directions and the points of the other
subspaces (the incoherence), and the smallest inradius of the symmetrized
hulls obtained by leaving one point out.  Incoherence below that inradius
certifies that every point is represented within its own subspace.
"""
import numpy as np

from sscgeo.clustering import ssc_pipeline
from sscgeo.datagen import gen_semi_random, make_rng, random_subspace
from sscgeo.geometry import affinity, check_geometric_condition, inradius

rng = make_rng(1)
bases = [random_subspace(20, 3, r) for r in rng.spawn(2)]
ds = gen_semi_random(bases, [20, 20], rng)
print("affinity between the two subspaces: %.3f (max %.3f)" % (affinity(*bases), np.sqrt(3)))

for cert in check_geometric_condition(ds.X, ds.labels, bases):
    print("subspace %d: incoherence %.3f, min inradius %.3f -> %s"
          % (cert.label, cert.mu, cert.min_inradius, cert.verdict))

res = ssc_pipeline(ds.X, truth=ds.labels)
print("feature detection error:", res.metrics.feature_detection_error)

# the cross-polytope conv(+-e_i) has inradius 1/sqrt(d)
print("cross-polytope inradius in R^3: %.6f vs %.6f" % (inradius(np.eye(3)), 1 / np.sqrt(3)))

# a second pair that nearly coincides: the certificate no longer holds
near = [bases[0], np.linalg.qr(bases[0] + 0.05 * rng.standard_normal((20, 3)))[0]]
ds2 = gen_semi_random(near, [20, 20], rng)
verdicts = [c.verdict for c in check_geometric_condition(ds2.X, ds2.labels, near)]
print("nearly identical subspaces:", verdicts)
