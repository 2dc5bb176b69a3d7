"""From-scratch numerical core: layers, optimizer, PCA, SVM, model files."""

from .adam import Adam
from .layers import (BatchNorm, Conv2D, Dense, Dropout, Flatten, Layer,
                     MaxPool2x2, Network, ReLU, glorot_uniform, softmax,
                     softmax_cross_entropy)
from .model_io import load_arrays, save_arrays
from .pca import PrincipalComponents
from .svm import LinearHingeSvm

__all__ = [
    "Adam", "BatchNorm", "Conv2D", "Dense", "Dropout", "Flatten", "Layer",
    "MaxPool2x2", "Network", "ReLU", "glorot_uniform", "softmax",
    "softmax_cross_entropy", "load_arrays", "save_arrays",
    "PrincipalComponents", "LinearHingeSvm",
]
