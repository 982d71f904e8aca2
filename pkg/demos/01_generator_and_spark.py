"""Cubic B-spline generator, the sampling matrix and its full-spark constant."""
import numpy as np

from siphase import Generator, SamplingScheme, build_phi_matrix, is_full_spark, phi_n_inverse_norm, validate_scheme

g = Generator.bspline(4)
t = np.linspace(0, 4, 9)
print("B4 on a half-integer grid:", np.round(g(t), 4))

# Seven nodes X = {m/8} give a 7 x 4 matrix of shifted generator values.
X = [m / 8 for m in range(1, 8)]
phi = build_phi_matrix(g, X)
print("Phi shape:", phi.shape)
print("full spark:", is_full_spark(phi))
print("max inverse norm over 4-row submatrices: %.2f" % phi_n_inverse_norm(phi))

# A scheme also fixes the forward and backward node subsets and the period L.
check = validate_scheme(SamplingScheme.default(7))
print("smallest generator value on the extension nodes: %.3g" % check.node_min)
