"""
Classical classifiers used as baselines: k-nearest neighbors and an RBF
kernel support vector machine. Both take the same vector inputs as the
autoencoder.
"""
