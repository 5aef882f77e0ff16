# Spatiotemporal Graph Convolution Configuration

# Sequence settings
OBSERVED_FRAMES = 10  # K, input length
PREDICTED_FRAMES = 25  # L, output length
COORDINATE_DIM = 3  # D, coordinates per joint
FRAME_RATE = 25  # Frames per second after down-sampling

# Network settings
CHANNELS = 64  # C, hidden feature width
REDUCTION_RATE = 32  # r, compact width of the adjustment head is ceil(C / r)
BLOCK_COUNT = 5  # n_b, residual basic blocks
UNITS_PER_BLOCK = 1  # n_c, GC units inside each block
DEFAULT_GC_KIND = 'dstd'
DEFAULT_VARIANT = 'full'
DEFAULT_INDEX_CONVENTION = 'source_frame'
DEFAULT_PRECISION = 'float64'  # 'float32' speeds up training; verification always runs at float64
SPATIAL_BRANCHES = 2  # Parallel DS-GC branches (natural + semantic prior)
POSE_SCALE = 1000.0  # Millimeters per model unit; encode sees poses divided by it, decode output is multiplied back

# Training settings
LEARNING_RATE = 3e-3
LR_DECAY = 0.9  # Multiplied into the learning rate every LR_DECAY_EVERY epochs
LR_DECAY_EVERY = 5
BATCH_SIZE = 32
EPOCHS = 50  # Desk-scale default
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
LOSS_SPAN = 'full_sequence'  # 'full_sequence' or 'future_only'
SEED = 0

# Evaluation settings
HORIZONS_MS = (80, 160, 320, 400, 560, 1000)
SHORT_TERM_LIMIT_MS = 500  # Horizons below are short-term, above are long-term
EVAL_MODE = 'frame'  # 'frame' (error at the mapped frame) or 'cumulative' (mean up to it)

# Synthetic data settings
SYNTH_JOINTS = 12
SYNTH_TRAIN_COUNT = 200
SYNTH_TEST_COUNT = 50
SYNTH_AMPLITUDE = 100.0  # Millimeters
SYNTH_NOISE = 1.0  # Millimeters
SYNTH_PHASE_LAG = 0.4  # Radians per chain link
SYNTH_BASE_FREQUENCY = 0.8  # Hz, first chain; later chains step up by SYNTH_FREQUENCY_STEP
SYNTH_FREQUENCY_STEP = 0.15

# Benchmark settings
BENCH_FRAMES = (16, 24, 32, 48, 64)
BENCH_CHANNELS = 64
BENCH_BATCH = 16
BENCH_JOINT_RATIO = 0.7  # J = round(ratio * T)
BENCH_REPETITIONS = 11
BENCH_WARMUP = 3
BENCH_MIN_SECONDS = 1e-3  # Timer floor per repetition; inner loops grow until reached
BENCH_MAX_INNER = 64  # Inner-loop cap
THREADS_ENV = 'STGC_THREADS'

# Verification settings
VERIFY_SEEDS = 100
FACTORIZATION_TOLERANCE = 1e-10
EQUIVALENCE_TOLERANCE = 1e-11
WITNESS_THRESHOLD = 1e-6
GRAD_TOLERANCE = 1e-4

# Correlation inspection
INSPECT_TOP_K = 3

# Logging settings
LOG_LEVEL = 'INFO'  # DEBUG, INFO, WARNING, ERROR
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
