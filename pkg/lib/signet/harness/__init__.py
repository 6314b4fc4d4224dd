"""
Experiment harness: configuration, train/test splits, the experiment grid
runner and its reports.
"""
