"""Reading and writing the JSON model format."""

import json
import logging
import math
from typing import Any, Dict, List

from gcmdp.config import RENORMALIZE_TOLERANCE
from gcmdp.errors import ParseError, ValidationError
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.validation import ValidationResult, check_mdp
from gcmdp.models.value import ValueFn, decode_number

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {"name", "discount", "states", "actions"}
ACTION_KEYS = {"label", "cost", "transitions"}
TRANSITION_KEYS = {"to", "p"}


def load_mdp(path: str, renormalize: bool = False) -> Mdp:
    """Load and validate a model file.

    Args:
        path: Path of a UTF-8 JSON model file
        renormalize: Rescale probability lists whose sum is within 1e-6 of 1

    Returns:
        The validated model; state indices follow file order

    Raises:
        OSError: If the file cannot be read
        ParseError: If the file is not valid JSON or misses required fields
        ValidationError: If the model violates an invariant
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Error parsing {path}: {str(e)}")
    mdp = mdp_from_dict(data, renormalize=renormalize)
    logger.info("loaded %s: %d states, %d pairs", mdp.name, mdp.n_states, mdp.n_pairs)
    return mdp


def mdp_from_dict(data: Any, renormalize: bool = False) -> Mdp:
    """Build and validate a model from its decoded JSON form.

    Args:
        data: Decoded JSON document
        renormalize: Rescale probability lists whose sum is within 1e-6 of 1

    Returns:
        The validated model

    Raises:
        ParseError: If required fields are missing or mistyped
        ValidationError: If the model violates an invariant
    """
    if not isinstance(data, dict):
        raise ParseError("model file must contain a JSON object")

    result = ValidationResult()
    for key in sorted(set(data) - TOP_LEVEL_KEYS):
        result.add_error(f"unknown key {key!r}", "model")

    states = data.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ParseError("'states' must be a list of strings")
    raw_actions = data.get("actions")
    if not isinstance(raw_actions, dict):
        raise ParseError("'actions' must be an object keyed by state label")
    discount = data.get("discount", 1.0)
    if isinstance(discount, bool) or not isinstance(discount, (int, float)):
        raise ParseError("'discount' must be a number")
    name = data.get("name", "mdp")
    if not isinstance(name, str):
        raise ParseError("'name' must be a string")

    index = {label: i for i, label in enumerate(states)}
    for label in sorted(set(raw_actions) - set(index)):
        result.add_error("actions given for undeclared state", f"state {label!r}")

    actions: List[List[Action]] = []
    for label in states:
        entries = raw_actions.get(label, [])
        if not isinstance(entries, list):
            raise ParseError(f"state {label!r}: actions must be a list")
        actions.append([_parse_action(raw, label, index, renormalize, result) for raw in entries])

    mdp = Mdp(states, actions, discount=float(discount), name=name)
    result.merge(check_mdp(mdp))
    if not result.valid:
        raise ValidationError(f"invalid model {name!r}: {result.summary()}", result.errors)
    return mdp


def _parse_action(
    raw: Any,
    state: str,
    index: Dict[str, int],
    renormalize: bool,
    result: ValidationResult,
) -> Action:
    where = f"state {state!r}"
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: action must be an object")
    label = raw.get("label")
    if not isinstance(label, str):
        raise ParseError(f"{where}: action label must be a string")
    where = f"state {state!r}, action {label!r}"
    for key in sorted(set(raw) - ACTION_KEYS):
        result.add_error(f"unknown key {key!r}", where)
    cost = raw.get("cost")
    if isinstance(cost, bool) or not isinstance(cost, (int, float)):
        raise ParseError(f"{where}: cost must be a number")
    raw_transitions = raw.get("transitions")
    if not isinstance(raw_transitions, list):
        raise ParseError(f"{where}: transitions must be a list")

    transitions = []
    for item in raw_transitions:
        if not isinstance(item, dict):
            raise ParseError(f"{where}: transition must be an object")
        for key in sorted(set(item) - TRANSITION_KEYS):
            result.add_error(f"unknown key {key!r}", where)
        target = item.get("to")
        p = item.get("p")
        if not isinstance(target, str) or isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ParseError(f"{where}: transition needs a string 'to' and a numeric 'p'")
        if target not in index:
            result.add_error(f"transition to unknown state {target!r}", where)
            continue
        transitions.append((index[target], float(p)))

    if renormalize and transitions:
        total = math.fsum(p for _, p in transitions)
        if total > 0 and abs(total - 1.0) <= RENORMALIZE_TOLERANCE:
            transitions = [(target, p / total) for target, p in transitions]
    return Action(label, float(cost), tuple(transitions))


def mdp_to_dict(mdp: Mdp) -> Dict[str, Any]:
    """Encode a model in the file schema."""
    actions: Dict[str, List[Dict[str, Any]]] = {}
    for state, label in enumerate(mdp.state_ids):
        actions[label] = [
            {
                "label": action.label,
                "cost": action.cost,
                "transitions": [
                    {"to": mdp.state_ids[target], "p": p} for target, p in action.transitions
                ],
            }
            for action in mdp.actions[state]
        ]
    return {
        "name": mdp.name,
        "discount": mdp.discount,
        "states": list(mdp.state_ids),
        "actions": actions,
    }


def save_mdp(mdp: Mdp, path: str) -> None:
    """Write a model file.

    Args:
        mdp: The model to write
        path: Destination path

    Raises:
        ValueError: If writing fails
    """
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(mdp_to_dict(mdp), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise ValueError(f"Error writing model file: {str(e)}")


def _read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Error parsing {path}: {str(e)}")


def value_fn_from_json(data: Any, mdp: Mdp) -> ValueFn:
    """Decode a value function given as a list in state order or a label mapping.

    Raises:
        ParseError: If the shape, a label or a number is wrong
    """
    if isinstance(data, list):
        if len(data) != mdp.n_states:
            raise ParseError(f"expected {mdp.n_states} values, got {len(data)}")
        items = data
    elif isinstance(data, dict):
        unknown = sorted(set(data) - set(mdp.state_ids))
        if unknown:
            raise ParseError(f"unknown states: {', '.join(unknown)}")
        missing = [label for label in mdp.state_ids if label not in data]
        if missing:
            raise ParseError(f"missing states: {', '.join(missing)}")
        items = [data[label] for label in mdp.state_ids]
    else:
        raise ParseError("a value function must be a list or an object")
    try:
        return ValueFn([decode_number(v) for v in items])
    except ValueError as e:
        raise ParseError(str(e))


def load_value_fn(path: str, mdp: Mdp) -> ValueFn:
    """Read a value function file for a model."""
    return value_fn_from_json(_read_json(path), mdp)


def load_policy(path: str, mdp: Mdp) -> StationaryPolicy:
    """Read a stationary policy file {"<state>": "<action label>"}."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ParseError("a policy must be an object mapping states to action labels")
    try:
        return StationaryPolicy.from_labels(mdp, data)
    except ValueError as e:
        raise ParseError(str(e))
