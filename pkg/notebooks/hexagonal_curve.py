import sys
sys.path.insert(0, "..")

import netelast.net as net
import netelast.solver as solver
import netelast.moves as moves
import netelast.deform as deform
import netelast.mechanics as mechanics

g, period = net.lattice_preset("hexagonal", l=1, w0=1, w1=1)
r, _ = solver.standardize(g, period)
params = moves.MoveParams(0.5, moves.Firmness(15))
schedule = deform.Schedule.slow(5.0, params, mechanics.rotation_2d(0.0))

for trace in deform.slow_deform_gen(g, r, schedule):
    if trace.events:
        print(trace.events[-1])

print("R =", deform.energy_loss_ratio(trace))
for point in deform.stress_strain_curve(trace, None, [1 + k / 10 for k in range(41)]):
    print("{:.2f},{:.6f},{:.6f},{:.6f}".format(*point))
