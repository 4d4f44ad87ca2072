"""Compress a chunk of chain dynamics into a fixed two-layer circuit.

The loop appends one short evolution step per iteration and retrains the
ansatz from the previous optimum, so every optimization starts warm. The
fixed circuit slowly runs out of expressibility as time accumulates — watch
the per-step training loss creep up and the schedule halve the step once it
crosses the threshold. The fidelity column compares the compressed circuit
against exact evolution of the full elapsed time.
"""
import numpy as np

from warmstart.circuits import build_hva
from warmstart.models import xz_chain
from warmstart.optimize import AdaptiveSchedule, compress_run
from warmstart.states import basis_state

n = 4
h = xz_chain(n)
ansatz = build_hva(h, 2)
psi0 = basis_state(n)

schedule = AdaptiveSchedule(total_time=0.5, dt_init=0.1, loss_threshold=2e-3, max_steps=40)
log = compress_run(ansatz, h, psi0, schedule, seed=7)

print(f"{n}-qubit chain, {ansatz.n_params}-parameter circuit")
print(f"{'step':>4} {'dt':>8} {'train loss':>12} {'t so far':>9} {'fidelity':>9}")
for s in log.steps:
    print(
        f"{s.k:>4} {s.dt:>8.4f} {s.final_loss:>12.3e} "
        f"{s.cumulative_time:>9.3f} {s.cumulative_fidelity:>9.6f}"
    )
print(f"completed: {log.completed} ({log.reason})")
print(f"fidelity after t = {log.cumulative_time:.2f}: {log.final_fidelity:.6f}")
