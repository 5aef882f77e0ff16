# Spatiotemporal Graph Convolution Package
