"""Pulse budget for a 100 ns coherence time and 50 ps gates."""
import json

from encdd.dynamics import analytic_coherence, feasibility
from encdd.recipes import to_ns

rep = feasibility(to_ns("100 ns"), (1, 100), to_ns("50 ps"))
print(json.dumps(rep.to_dict(), indent=2))
print("coherence at t = tau_c:", analytic_coherence(1.0, 1.0))
