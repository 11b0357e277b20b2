#*****************
#WORKING PRECISION
#*****************
DEFAULT_PRECISION_BITS = 512 #bits, significand of every scalar
MIN_PRECISION_BITS = 64 #bits

#***********
#ROOT FINDER
#***********
ROOT_MAX_STEPS = 1000 #simultaneous iteration sweeps
ROOT_RESIDUAL_FACTOR = 8 #multiples of (deg+1)*2**-bits in the Horner residual bound
ROOT_SEED_SPLIT = 2.0**-20 #relative offset separating coincident float seeds

#*************
#ROW ANALYSIS
#*************
DEFAULT_WINDOW = 32 #coefficients, trailing window of limsup proxies
DEFAULT_SAMPLES = 256 #points on a sampling circle
MIN_SAMPLES = 16 #points
MIN_FIT_POINTS = 6 #uncensored values needed by a rate fit
NOISE_GUARD = 2.0**16 #dynamic-range guard of the noise floor
MERGE_RADIUS = 1e-4 #relative distance merging zero tracks into one cluster
TRAILING_WINDOW = 20 #records used by zero clustering
CIRCLE_MARGIN = 1e-3 #minimum distance between a sampling circle and a pole

#*************
#SYSTEM POLES
#*************
QUADRATURE_POINTS = 256 #trapezoid nodes on |w-a| = delta
QUADRATURE_SHRINK = 0.25 #delta as a fraction of the distance to the closest other singularity
LIMIT_MATCH_RADIUS = 1e-6 #relative distance at which a limit zero cancels a pole
