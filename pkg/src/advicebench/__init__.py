"""Advice-complexity workbench for online algorithms.

Modules
-------
core         online problems, algorithms, runs, expectations, derandomization
infotheory   entropy, KL, the K function and every named bound formula
games        zero-sum cost games and the repeated matrix game
guessing     string guessing variants, HSGG, anti-covering codes
tasksystems  generalized and lazy task systems, Hedge, phase machinery
oracle       brute-force ground truth and bound certification
reductions   anti-guessing to paging, weighted guessing to bin packing
cli          command-line front door
"""

__version__ = "0.1.0"
