"""Three fixed beam nodes and the prompts built for them (shared by golden tests and the regen script)."""
from pathlib import Path

from promise.prompt import MethodStats, build_prompt, derive_plan, goal_family, rank_methods, summarize_failures
from promise.names import assemble_inventory
from promise.retrieval import structural_retrieval
from promise.search import BeamNode
from promise.trace_index import parse_goal

GOLDEN_DIR = Path(__file__).parent / "golden"

FIXTURES = {
    # name: (target, prefix, recent errors, C)
    "root_double_zero": ("double_zero", [], [], 12),
    "mid_invs_tick_step": ("invs_tick_step", ["apply (rule invs_tick)"],
                           [("apply (rule ghost1)", "unknown_fact", "unknown fact 'ghost1'"),
                            ("apply simp", "tactic_failed", "simp made no progress")], 8),
    "cases_neg_neg": ("neg_neg", ["apply (cases b)"],
                      [(f"apply (rule ghost{i})", "unknown_fact", f"unknown fact 'ghost{i}'") for i in range(1, 6)]
                      + [("apply (simp add: add_comm)", "timeout", "rewrite step bound exceeded")], 4),
}


def fixture_node(prover, target, prefix):
    state = prover.probe_initial_state(target)
    for cmd in prefix:
        state = prover.apply_command(state, cmd).state
    return BeamNode(tuple(prefix), state, len(prefix))


def build_fixture_prompt(name, prover, index):
    target, prefix, errors, C = FIXTURES[name]
    node = fixture_node(prover, target, prefix)
    templates = structural_retrieval(index, node.goal_text, target, prover.theorem_statement(target), prover)
    inventory = assemble_inventory(node.goal_text, node.state, prover, target)
    stats = MethodStats.from_index(index)
    plan = derive_plan(rank_methods(goal_family(parse_goal(node.goal_text)), templates, stats), C)
    return build_prompt(node, templates, inventory, summarize_failures(errors), plan), templates, inventory
