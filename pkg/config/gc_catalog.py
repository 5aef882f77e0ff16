"""
Graph Convolution Catalogue
Reference data for every GC kind and dataset preset
"""

# GC kind catalogue
# 'reference_params' is the comparison-stack count at J=25, T=35, C=64, 7 units
# 'param_tolerance' is the accepted relative deviation of the computed count
GC_CONFIGS = {
    # Full spatiotemporal graph - Largest
    'st': {
        'name': 'Spatiotemporal GC (ST-GC)',
        'description': 'One (JT x JT) adjacency over all joint-frame vertices',
        'spatiotemporal_unshared': True,
        'sample_specific': False,
        'constraints': {'c1': False, 'c2': False, 'c3': True, 'c4': False, 'c5': False},
        'storage': 'O((JT)^2)',
        'reference_params': 5.44e6,
        'param_tolerance': 0.10,
    },

    's': {
        'name': 'Spatial GC (S-GC)',
        'description': 'Per-frame spatial adjacency, spatial aggregation only',
        'spatiotemporal_unshared': False,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': False, 'c3': True, 'c4': False, 'c5': False},
        'storage': 'O(TJ^2)',
        'reference_params': None,
        'param_tolerance': None,
    },

    't': {
        'name': 'Temporal GC (T-GC)',
        'description': 'Per-joint temporal adjacency, temporal aggregation only',
        'spatiotemporal_unshared': False,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': False, 'c3': True, 'c4': False, 'c5': False},
        'storage': 'O(JT^2)',
        'reference_params': None,
        'param_tolerance': None,
    },

    # Decomposed static graphs
    'std': {
        'name': 'Spatial-Temporal Decompose GC (STD-GC)',
        'description': 'S-GC stacked before T-GC with unshared adjacencies',
        'spatiotemporal_unshared': True,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': False, 'c3': True, 'c4': True, 'c5': False},
        'storage': 'O(JT^2 + J^2 T)',
        'reference_params': 0.46e6,
        'param_tolerance': 0.25,
    },

    'tsd': {
        'name': 'Temporal-Spatial Decompose GC (TSD-GC)',
        'description': 'T-GC stacked before S-GC with unshared adjacencies',
        'spatiotemporal_unshared': True,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': False, 'c3': True, 'c4': True, 'c5': False},
        'storage': 'O(JT^2 + J^2 T)',
        'reference_params': 0.46e6,
        'param_tolerance': 0.25,
    },

    'vstd': {
        'name': 'Vanilla STD-GC (VSTD-GC)',
        'description': 'Decomposed GC with one spatial and one temporal matrix shared across the other axis',
        'spatiotemporal_unshared': False,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': True, 'c3': True, 'c4': False, 'c5': False},
        'storage': 'O(J^2 + T^2)',
        'reference_params': 0.10e6,
        'param_tolerance': 0.50,
    },

    'sts': {
        'name': 'Spatiotemporal Separable GC (STS-GC)',
        'description': 'Factorized unshared adjacencies with a single feature transform',
        'spatiotemporal_unshared': True,
        'sample_specific': False,
        'constraints': {'c1': True, 'c2': False, 'c3': True, 'c4': True, 'c5': False},
        'storage': 'O(JT^2 + J^2 T)',
        'reference_params': 0.45e6,
        'param_tolerance': 0.25,
    },

    # Dynamic graphs - Sample specific
    'ds': {
        'name': 'Dynamic Spatial GC (DS-GC)',
        'description': 'Constrained spatial correlation adjusted per sample and per frame',
        'spatiotemporal_unshared': False,
        'sample_specific': True,
        'constraints': {'c1': True, 'c2': False, 'c3': False, 'c4': True, 'c5': True},
        'storage': 'O(J^2)',
        'reference_params': None,
        'param_tolerance': None,
    },

    'dt': {
        'name': 'Dynamic Temporal GC (DT-GC)',
        'description': 'Constrained temporal correlation adjusted per sample and per joint',
        'spatiotemporal_unshared': False,
        'sample_specific': True,
        'constraints': {'c1': True, 'c2': False, 'c3': False, 'c4': True, 'c5': True},
        'storage': 'O(T^2)',
        'reference_params': None,
        'param_tolerance': None,
    },

    'dstd': {
        'name': 'Dynamic Spatiotemporal Decompose GC (DSTD-GC)',
        'description': 'DS-GC stacked before DT-GC',
        'spatiotemporal_unshared': True,
        'sample_specific': True,
        'constraints': {'c1': True, 'c2': False, 'c3': False, 'c4': True, 'c5': True},
        'storage': 'O(J^2 + T^2)',
        'reference_params': 0.13e6,
        'param_tolerance': 0.25,
    },

    'dtsd': {
        'name': 'Dynamic Temporal-Spatial Decompose GC (DTSD-GC)',
        'description': 'DT-GC stacked before DS-GC',
        'spatiotemporal_unshared': True,
        'sample_specific': True,
        'constraints': {'c1': True, 'c2': False, 'c3': False, 'c4': True, 'c5': True},
        'storage': 'O(J^2 + T^2)',
        'reference_params': 0.13e6,
        'param_tolerance': 0.25,
    },
}

DEFAULT_GC = 'dstd'

# Parameter-count ordering of the comparison stacks, smallest first (ties share a rank)
PARAM_ORDER = [['vstd'], ['dstd', 'dtsd'], ['sts', 'std', 'tsd'], ['st']]

# Full-model totals (5 blocks x 1 unit, C=64, T=35)
FULL_MODEL_PARAMS = {
    22: 0.18e6,
    25: 0.20e6,
}
FULL_MODEL_TOLERANCE = 0.25

# Dataset presets
DATASET_PRESETS = {
    'h36m': {
        'name': 'Human3.6M (22 joints)',
        'joints': 22,
        'observed': 10,
        'predicted': 25,
        'fps': 25,
        'horizons_ms': [80, 160, 320, 400, 560, 1000],
    },
    'cmu': {
        'name': 'CMU Mocap (25 joints)',
        'joints': 25,
        'observed': 10,
        'predicted': 25,
        'fps': 25,
        'horizons_ms': [80, 160, 320, 400, 560, 1000],
    },
    '3dpw': {
        'name': '3DPW (23 joints)',
        'joints': 23,
        'observed': 10,
        'predicted': 30,
        'fps': 25,
        'horizons_ms': [200, 400, 600, 800, 1000],
    },
    'synthetic': {
        'name': 'Synthetic kinematic chains (12 joints)',
        'joints': 12,
        'observed': 10,
        'predicted': 25,
        'fps': 25,
        'horizons_ms': [80, 160, 320, 400, 560, 1000],
    },
}

DEFAULT_DATASET = 'synthetic'


def get_gc_config(kind):
    """Get catalogue entry for a GC kind"""
    if kind not in GC_CONFIGS:
        raise KeyError(f"unknown GC kind '{kind}', expected one of {sorted(GC_CONFIGS)}")
    return GC_CONFIGS[kind]


def get_dataset_preset(name=DEFAULT_DATASET):
    """Get sequence lengths and horizons of a dataset preset"""
    if name not in DATASET_PRESETS:
        raise KeyError(f"unknown dataset preset '{name}', expected one of {sorted(DATASET_PRESETS)}")
    return DATASET_PRESETS[name]


def get_param_target(kind):
    """Reference count and tolerance, or None when the kind has no reference count"""
    config = get_gc_config(kind)
    if config['reference_params'] is None:
        return None
    return config['reference_params'], config['param_tolerance']


def constraint_marks(kind):
    """Constraint flags as a compact check-mark string, e.g. 'C1 C3 C4'"""
    config = get_gc_config(kind)
    return ' '.join(name.upper() for name, holds in config['constraints'].items() if holds)


def print_gc_info(kind):
    """Print detailed information for a GC kind"""
    config = get_gc_config(kind)

    print(f"\n=== {config['name']} ===")
    print(f"Description: {config['description']}")
    print(f"Spatiotemporal-unshared: {'yes' if config['spatiotemporal_unshared'] else 'no'}")
    print(f"Sample-specific: {'yes' if config['sample_specific'] else 'no'}")
    print(f"Correlation storage: {config['storage']}")
    print(f"Subject to: {constraint_marks(kind) or '-'}")
    if config['reference_params'] is not None:
        print(f"Reference params: {config['reference_params'] / 1e6:.2f}M")


if __name__ == "__main__":
    print("Graph Convolution Catalogue")
    print("=" * 40)

    print("\nAvailable GC kinds:")
    for kind in GC_CONFIGS:
        print(f"  {kind}: {GC_CONFIGS[kind]['name']}")

    print("\nDataset presets:")
    for name, preset in DATASET_PRESETS.items():
        print(f"  {name}: J={preset['joints']} K={preset['observed']} L={preset['predicted']}")

    print_gc_info(DEFAULT_GC)
