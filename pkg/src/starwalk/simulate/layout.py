"""Index constants shared by the numba kernels and the numpy fallback."""

# ip (int64 parameters)
I_MODE, I_NSUB, I_LT, I_RELABEL, I_EDGE0, I_MAXSTEPS = range(6)
N_IP = 6

# fp (float64 parameters)
F_BETA, F_GAMMA, F_DT, F_T, F_BALL, F_ALPHA, F_EPS, F_X0, F_SMAX = range(9)
N_FP = 9

# per-path float outputs
O_T, O_X, O_L, O_S, O_POT, O_KILL_LEVEL, O_TRUNC = range(7)
N_OF = 7

MODE_TERMINAL, MODE_EXIT, MODE_POTENTIAL, MODE_LIFETIME = range(4)
LT_OCCUPATION, LT_DOWNCROSSING, LT_BRIDGE = range(3)
