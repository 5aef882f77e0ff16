"""
Spatiotemporal Graph Convolution Tests

Per-area test scripts; each runs standalone or under pytest.
"""
