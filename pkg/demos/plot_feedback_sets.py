"""
Cheapest packets to ask for
===========================

When peeling stalls, the receiver requests a few packets so that the rest
becomes decodable. Seen as a bipartite graph with one vertex per row and
column and one edge per lost packet, a request set must break every cycle.
"""

from rectfec import CodeParams, CostFunction, ErrorConfiguration, build_gadget
from rectfec import min_frs_unit, min_frs_weighted, repair_cost_formula

# three separate stuck clusters on a 10 x 10 grid
cells = ([(0, 0), (0, 1), (1, 0), (1, 1)]
         + [(i, j) for i in (2, 3) for j in (2, 3, 4)]
         + [(4, 5), (4, 6), (4, 8), (4, 9), (5, 5), (5, 7), (5, 8), (5, 9),
            (6, 6), (6, 7), (6, 9)])
params = CodeParams(9, 9)
config = ErrorConfiguration.from_cells(9, 9, cells)
g = build_gadget(config, params)

R, C, comps = g.rows_hit, g.cols_hit, g.n_nonsingleton_components
print(f"{g.n_edges} errors over {R} rows and {C} columns, {comps} clusters")

# count: errors minus rows minus columns plus clusters
frs = min_frs_unit(g)
print("request", frs.indices, "cost", frs.cost)
print("by counting:", repair_cost_formula(g.n_edges, R, C, comps))

###############################################################################
# Preferring parity packets. Sources cost slightly more than 1, so among
# equally small sets the solver picks parities.

corner = ErrorConfiguration.from_cells(2, 2, [(0, 0), (0, 2), (2, 0), (2, 2)])
g2 = build_gadget(corner, CodeParams(2, 2), CostFunction.MODIFIED_ALL_OR_NONE)
for r, c, k, w in g2.edges():
    print(f"cell ({r},{c}) packet {k} weight {w}")
print("picked", min_frs_weighted(g2).indices)
