"""Formations, transpositions and three-robot entry shapes.

Run with ``python notebooks/03_formations_and_shapes.py``. First checks the
router/cleaner move with and without its transposition, then lists the twelve
ways three robots can enter a subtree and what splicing a repeated entry
saves.
"""

from mrfgc.corpus import router_cleaner_transition
from mrfgc.library import collapsible_closure, is_collapsible
from mrfgc.shapes import enumerate_shapes, shape_repeat_example, shape_z_transform

for flag in (True, False):
    g, be, a, b = router_cleaner_transition(flag)
    print(f"beta -> gamma with transposition={flag}: valid={be.is_valid_transition(g, a, b)}")

lib = router_cleaner_transition(True)[1].library
closed = collapsible_closure(lib)
print(f"router/cleaner library collapsible: {is_collapsible(lib)}")
print(f"after closure: {len(closed.formations)} formations, {len(closed.transpositions)} transpositions, collapsible: {is_collapsible(closed)}")

print("\nshape  pre(Q,P,R)  post(P,R,children)  time before -> after splice")
for s in enumerate_shapes():
    inst, x, i, j, r = shape_repeat_example(s)
    y = shape_z_transform(inst, x, i, j, r)
    print(f"{s.name:5}  {str(s.pre):10}  {str(s.post):18}  {x.time} -> {y.time}")
