"""
Spectral fraud detection on signed graphs.

Nodes of a signed graph are projected into the space spanned by the leading
eigenvectors of its adjacency matrix; the resulting spectral coordinates,
together with those of each node's positive and negative neighbors, are the
inputs of a deep autoencoder and a convolutional classifier (and of the k-NN
and RBF-SVM baselines they are compared against).
"""

__version__ = "0.3.0"
