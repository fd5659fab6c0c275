"""Frozen expected values, derived at 50-digit precision.

Regenerate with  python3 tools/derive_reference_values.py > tests/_refvals.py
"""

LINEAR_LAM_09_11 = 0.9090909090909091  # max(0.9, 1/1.1)
MU_STAR_09_005 = 1.0095137420718816  # lam=0.9 k=0.05 C=0 rho=0.5 eps=0.1
CONTRACTION_09_005 = 0.09619450317124731  # slab contraction slack
POLY_MU_STAR = 1.0006414368184733  # poly budget, eps=1e-2
POLY_SLAB_BRANCH_X = 0.017904290429042905
POLY_SLAB_BRANCH_S = 0.006765012251382777
POLY_EPS_S = 0.006765012251382777  # min of the two branches
BOUND_X_N10 = 0.0006908049875977791  # I0_x=1 s0=0.3 n=10
BOUND_S_N10 = 0.08499313321582827  # I0_s=I0_x=1 s0=0.3 n=10
SN_BOUND_N5 = 0.01509853125  # s0=0.3 n=5
STRETCH_REFINED_01 = 1.9375  # lam=0.5 k=C=0.05 rho=0.5 eps=0.1
RATIO_LHS_111_0521 = 1.3228756555322954  # v=(1,1,1) -> (0.5,2,1)
POLY_IMAGE_02_02 = (0.10200000000000001, 0.402, 0.0020000000000000005)
POLY_JAC_02_02 = ((0.51, 0.010000000000000002, 0.0), (0.010000000000000002, 2.01, 0.0), (0.010000000000000002, 0.010000000000000002, 1.0))
POLY_JET3_I_X = 0.1277863013685114  # p0=(0.2,0.01,0) v0=(1,1,1)
POLY_JET3_I_S = 0.017780699837422274
POLY_JET3_POINT = (0.02517635521577928, 0.08070225596577928, 0.00030165546577928007)
SQUARE_GRAPH_INV_005_015 = (0.0741811334208615, 0.15550284055560365)  # s=0.05+u^2, u=0.15+s^2
THETA_ADVANCE_017 = 2.06814150222053  # theta=1, I=0.17, one 2*pi return
