"""CVRP solvers (exact MILP, savings + guided local search, REINFORCE policy) and a benchmark harness."""
