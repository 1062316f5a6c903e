#!/usr/bin/env python3
"""Find RNG seeds that replay the logged perturbation examples exactly.

The replay tests pin frozen seeds; rerun this script after any change to
the operations' sampling order and update the constants in
tests/test_acceptance.py and tests/test_cli.py.
"""

from __future__ import annotations

import random

from augsearch.corpus import tokenize
from augsearch.lexicons import load_lexicons
from augsearch.policy import augment_example, parse_policy_text
from augsearch.ops import apply_operation
from augsearch.util import derive_rng

ORIGINAL = (
    "fresh install of crack of the day : gdm login __eot__ "
    '" can\'t access ACPI bla bla bla " __eou__ '
    "you don't want to be me ... __eou__ "
    "ah , it happened to you too ?"
)

CASES = {
    "all_operations": (
        "(R, 4, 1.0)",
        "fresh install crack of of the day : gdm login __eot__ "
        '" can\'t ACPI access bla bla bla " __eou__ '
        "you don't want be to me ... __eou__ "
        "ah , it happened you to too ?",
    ),
    "input_agnostic": (
        "(D_v, 3, 0.2) (R, 1, 0.5)",
        "fresh install of crack of the day : login gdm __eot__ "
        '" can\'t access ACPI bla bla bla " __eou__ '
        "you want to me ... __eou__ "
        "ah , it happened to you too ?",
    ),
    "input_aware": (
        "(S, 1, 0.8) (D_v, 2, 0.5)",
        "fresh install of crack of the day : gdm login __eot__ "
        '" can\'t access ACPI bla bla bla bla " __eou__ '
        "you don't want to be me ... __eou__ "
        "ah , it happened to you too ?",
    ),
}


def replay(lexicons, plan, rng) -> str:
    ctx = tokenize(ORIGINAL, lexicons)
    ops = plan.ops if hasattr(plan, "ops") else (plan,)
    for op in ops:
        ctx = apply_operation(ctx, op, rng, lexicons)
    return ctx.detokenize()


def main() -> None:
    lexicons = load_lexicons()
    for name, (policy_text, expected) in CASES.items():
        plan = parse_policy_text(policy_text)
        for seed in range(2_000_000):
            if replay(lexicons, plan, random.Random(seed)) == expected:
                print(f"{name}: seed {seed}")
                break
        else:
            print(f"{name}: NOT FOUND")

    # CLI-level replay: augment_example derives the per-example stream from
    # (seed, "augment", 0) for a one-line corpus.
    plan = parse_policy_text(CASES["input_agnostic"][0])
    expected = CASES["input_agnostic"][1]
    for seed in range(2_000_000):
        if augment_example(ORIGINAL, plan, derive_rng(seed, "augment", 0), lexicons) == expected:
            print(f"cli_input_agnostic: seed {seed}")
            break
    else:
        print("cli_input_agnostic: NOT FOUND")


if __name__ == "__main__":
    main()
