"""Shared fixtures: state spaces, program corpus, and a classical-wp oracle."""

from fractions import Fraction

from pgclkit import parse_expression, parse_program, space_of
from pgclkit.exprs import Bracket, eval_expr
from pgclkit.programs import (
    Abort,
    Assert,
    Assign,
    ChooseFromSet,
    DemonChoice,
    GuardedIf,
    IfBool,
    Seq,
    Skip,
    SuchThat,
)

F = Fraction

EIGHTHS = tuple(F(k, 8) for k in range(9))
THIRDS = (F(0), F(1, 3), F(2, 3), F(1))


def coin_space():
    return space_of(("c1", ("H", "T")), ("c2", ("H", "T")))


def bit_space():
    return space_of(("x", (0, 1)))


def pqr_space(grid=EIGHTHS):
    """x plus the p, q, r variables of the bias-halving derivation."""
    return space_of(("x", (0, 1)), ("p", grid), ("q", grid), ("r", grid))


def prog(text, space, **params):
    return parse_program(text, space, {k: F(v) for k, v in params.items()})


def expr(text, space, **params):
    return parse_expression(text, space, {k: F(v) for k, v in params.items()})


# program (1): the specification being implemented throughout
BIAS_SPEC = "x :in 1 <p> 0"

# program (2): split p into q, r averaging to it, with the assertion
SPLIT_STEP = (
    "IF p <= 1/2 -> q,r := 0, 2*p [] p >= 1/2 -> q,r := 2*p-1, 1 FI; "
    "{p = (q+r)/2}"
)

# program (3): split, then let a fair coin pick which half to continue with
SPLIT_THEN_COIN = (
    "IF p <= 1/2 -> q,r := 0, 2*p [] p >= 1/2 -> q,r := 2*p-1, 1 FI; "
    "(x :in 1 <q> 0) <1/2> (x :in 1 <r> 0)"
)

# program (6): one loop-body iteration, feeding the halved bias back into p
HALVING_BODY = (
    "IF p <= 1/2 -> q,r := 0, 2*p [] p >= 1/2 -> q,r := 2*p-1, 1 FI; "
    "p :in q <1/2> r"
)

# program (8): the loop plus the final assignment
HALVING_LOOP = f"WHILE 0 < p & p < 1 DO {HALVING_BODY} OD; x := p"


def corpus(space_small=None):
    """Loop-free programs with spaces, for exhaustive property sweeps."""
    coins = coin_space()
    bits = bit_space()
    xy = space_of(("x", (0, 1, 2, 3)), ("y", (0, 1)))
    out = [
        (prog("SKIP", coins), coins),
        (prog("ABORT", coins), coins),
        (prog("c1 :in H <1/2> T; c2 :in H <1/2> T", coins), coins),
        (prog("c1 :in H <3/8> T; c2 :in H |^| T", coins), coins),
        (prog("c2 :in H |^| T; c1 :in H <1/4> T", coins), coins),
        (prog("IF c1 = H THEN c2 := H ELSE c2 := T", coins), coins),
        (prog("{c1 = c2}; c1 := T", coins), coins),
        (prog("x :in {0, 1}", bits), bits),
        (prog("x :in 1 <2/3> 0", bits), bits),
        (prog("x :dist [0: 1/4, 1: 3/4]", bits), bits),
        (prog("x :suchthat x = 0 | x = 1", bits), bits),
        (prog("y := 1; x :in y <1/2> 2*y", xy), xy),
        (prog("IF x <= 1 -> y := 0 [] x >= 1 -> y := 1 FI", xy), xy),
        (prog("x :dist [0: 1/2, y: 1/2]", xy), xy),
        (prog("(x := 0 |^| x := 1) <1/3> x := 2", xy), xy),
        (prog("x := 1 <x/3> x := 0", xy), xy),
    ]
    return out


def loop_corpus():
    coins = coin_space()
    geom = space_of(("c", ("H", "T")))
    pqr = pqr_space()
    return [
        (prog("c := H; WHILE c = H DO c :in H <1/2> T OD", geom), geom),
        (prog("WHILE c1 = H DO c1 :in H <1/4> T; c2 := H OD", coins), coins),
        (prog(HALVING_LOOP, pqr), pqr),
        # numeric guard: iterate with probability p, a probabilistic loop
        (prog("WHILE 1/2 DO c := T OD", geom), geom),
    ]


# --- classical (non-probabilistic) weakest precondition oracle --------------
#
# Covers the demonic, probability-free fragment only.  Predicates are plain
# frozensets of state indices; wp is computed by the textbook rules.  Kept
# independent of the engine on purpose: it exists to cross-check the 0/1
# embedding.


def classical_wp(p, space, post: frozenset) -> frozenset:
    if isinstance(p, Skip):
        return post
    if isinstance(p, Abort):
        return frozenset()
    if isinstance(p, Assign):
        out = set()
        for i in range(space.size):
            t = space.reindex(
                i, space.var_pos(p.var), eval_expr(p.expr, space.state_at(i))
            )
            if t >= 0 and t in post:
                out.add(i)
        return frozenset(out)
    if isinstance(p, Seq):
        return classical_wp(p.first, space, classical_wp(p.second, space, post))
    if isinstance(p, IfBool):
        then = classical_wp(p.then, space, post)
        orelse = classical_wp(p.orelse, space, post)
        out = set()
        for i in range(space.size):
            g = eval_expr(p.guard, space.state_at(i))
            if i in (then if g else orelse):
                out.add(i)
        return frozenset(out)
    if isinstance(p, DemonChoice):
        return classical_wp(p.left, space, post) & classical_wp(p.right, space, post)
    if isinstance(p, ChooseFromSet):
        out = set(range(space.size))
        for e in p.choices:
            out &= set(classical_wp(Assign(p.var, e), space, post))
        return frozenset(out)
    if isinstance(p, SuchThat):
        import itertools

        positions = [space.var_pos(v) for v in p.vars]
        out = set()
        for i in range(space.size):
            targets = []
            for combo in itertools.product(
                *(space.domains[q].values for q in positions)
            ):
                t = i
                for pos, v in zip(positions, combo):
                    t = space.reindex(t, pos, v)
                if eval_expr(p.pred, space.state_at(t)):
                    targets.append(t)
            # no satisfying value is a miraculous (everywhere-true) statement
            # in the classical reading; the engine treats it as an error, so
            # the oracle corpus avoids that case entirely
            if targets and all(t in post for t in targets):
                out.add(i)
        return frozenset(out)
    if isinstance(p, GuardedIf):
        out = set()
        for i in range(space.size):
            state = space.state_at(i)
            enabled = [b for g, b in p.branches if eval_expr(g, state)]
            if enabled and all(
                i in classical_wp(b, space, post) for b in enabled
            ):
                out.add(i)
        return frozenset(out)
    if isinstance(p, Assert):
        return frozenset(
            i for i in post if eval_expr(p.pred, space.state_at(i))
        )
    raise AssertionError(f"oracle does not cover {type(p).__name__}")


def pred_states(space, text) -> frozenset:
    e = parse_expression(text, space)
    return frozenset(
        i for i in range(space.size) if eval_expr(e, space.state_at(i))
    )


def bracket_post(space, text):
    from pgclkit import from_expr

    return from_expr(space, Bracket(parse_expression(text, space)))
