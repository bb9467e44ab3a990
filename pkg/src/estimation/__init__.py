"""
Softmax mixture estimators: hybrid EM, Hermite moments, method of moments
and subspace tools.
"""
