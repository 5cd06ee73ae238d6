//! Builds the final LTL task specification from reduced action policies, and
//! extracts a linear plan back out of the sequenced-visit fragment.
//!
//! Each action policy contributes its calls, in order, as items of one
//! sequenced visit. A `Wait(c)` item followed by a call `a` becomes
//! `(!a U c)`, forbidding premature execution of the successor; a trailing
//! `Wait(c)` becomes the bare condition atom. A `before` constraint
//! (`Wait(before:c)` after call `a`) becomes `(!c U a)`.

use crate::ltl::{Formula, LtlError};
use crate::model::{PrimitiveCall, ReductionPolicy};
use crate::parse::{ConnectiveKind, ConnectiveLink};

/// Marker prefix on a Wait argument carrying a `before` sequencer.
pub const BEFORE_MARKER: &str = "before:";

/// The primitive that suspends execution on a world condition.
pub const WAIT_NAME: &str = "Wait";

#[derive(Debug, Clone)]
enum SeqItem {
    Call(PrimitiveCall),
    WaitUntil(String),
    /// A call that must happen before its condition: `(!cond U call)`.
    Constrained(PrimitiveCall, String),
    /// A pre-built or/not group.
    Block(Formula),
}

fn policy_items(policy: &ReductionPolicy) -> Vec<SeqItem> {
    let mut items: Vec<SeqItem> = Vec::with_capacity(policy.calls.len());
    for call in &policy.calls {
        if call.name == WAIT_NAME && call.args.len() == 1 {
            let arg = call.args[0].as_str();
            if let Some(cond) = arg.strip_prefix(BEFORE_MARKER) {
                // fuse with the preceding call; a leading before-wait
                // degenerates to an until-wait
                if let Some(SeqItem::Call(prev)) = items.last().cloned() {
                    items.pop();
                    items.push(SeqItem::Constrained(prev, cond.to_string()));
                } else {
                    items.push(SeqItem::WaitUntil(cond.to_string()));
                }
            } else {
                items.push(SeqItem::WaitUntil(arg.to_string()));
            }
        } else {
            items.push(SeqItem::Call(call.clone()));
        }
    }
    items
}

fn first_call(items: &[SeqItem]) -> Option<&PrimitiveCall> {
    items.iter().find_map(|item| match item {
        SeqItem::Call(c) | SeqItem::Constrained(c, _) => Some(c),
        _ => None,
    })
}

fn build_sequence(items: &[SeqItem]) -> Formula {
    let Some((head, rest)) = items.split_first() else {
        return Formula::True;
    };
    let head_formula = match head {
        SeqItem::Call(c) => Formula::atom(c.clone()),
        SeqItem::Constrained(c, cond) => {
            Formula::until(Formula::not(Formula::condition(cond.clone())), Formula::atom(c.clone()))
        }
        SeqItem::WaitUntil(cond) => match first_call(rest) {
            Some(successor) => Formula::until(
                Formula::not(Formula::atom(successor.clone())),
                Formula::condition(cond.clone()),
            ),
            None => Formula::condition(cond.clone()),
        },
        SeqItem::Block(f) => f.clone(),
    };
    if rest.is_empty() {
        Formula::finally(head_formula)
    } else {
        Formula::finally(Formula::and(head_formula, build_sequence(rest)))
    }
}

/// A single action's branch inside an or/not group: a bare atom for one-call
/// policies, otherwise its own sequenced visit.
fn branch_formula(items: &[SeqItem]) -> Formula {
    match items {
        [SeqItem::Call(c)] => Formula::atom(c.clone()),
        _ => build_sequence(items),
    }
}

/// Translate reduced policies plus connective links into the final formula.
///
/// Policies must contain only primitive calls. Actions joined by `or` merge
/// into a single disjunctive item; a `not`-scoped action contributes its
/// negated branch; everything else is sequenced in order.
pub fn translate(
    policies: &[ReductionPolicy],
    links: &[ConnectiveLink],
) -> Result<Formula, LtlError> {
    let n = policies.len();
    if n == 0 {
        return Ok(Formula::True);
    }
    let check = |ordinal: usize| {
        if ordinal >= n {
            Err(LtlError::DanglingConnective { ordinal, count: n })
        } else {
            Ok(())
        }
    };

    // union-find over or-linked actions
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut negated = vec![false; n];
    for link in links {
        check(link.left)?;
        if let Some(right) = link.right {
            check(right)?;
        }
        match link.kind {
            ConnectiveKind::Or => {
                let right = link.right.ok_or(LtlError::DanglingConnective {
                    ordinal: link.left,
                    count: n,
                })?;
                let (a, b) = (root(&mut parent, link.left), root(&mut parent, right));
                if a != b {
                    parent[b.max(a)] = b.min(a);
                }
            }
            ConnectiveKind::Not => negated[link.left] = true,
            // plain sequencing; the sequenced visit already conjoins
            ConnectiveKind::And => {}
        }
    }

    let items_per_action: Vec<Vec<SeqItem>> = policies.iter().map(policy_items).collect();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups.sort_by_key(|(_, members)| members[0]);

    let mut sequence: Vec<SeqItem> = Vec::new();
    for (_, members) in groups {
        if members.len() == 1 {
            let i = members[0];
            if negated[i] {
                sequence.push(SeqItem::Block(Formula::not(branch_formula(&items_per_action[i]))));
            } else {
                sequence.extend(items_per_action[i].iter().cloned());
            }
        } else {
            let mut branches = members.iter().map(|&i| {
                let b = branch_formula(&items_per_action[i]);
                if negated[i] {
                    Formula::not(b)
                } else {
                    b
                }
            });
            let first = branches.next().expect("group is non-empty");
            let merged = branches.fold(first, Formula::or);
            sequence.push(SeqItem::Block(merged));
        }
    }
    if sequence.is_empty() {
        return Ok(Formula::True);
    }
    Ok(build_sequence(&sequence))
}

/// Walk the sequenced-visit spine of a translated formula and emit the plan
/// calls in execution order. `(!a U c)` contributes `Wait(c)` before `a`;
/// disjunctions take the left branch; negated items contribute nothing.
pub fn linearize(f: &Formula) -> Result<Vec<PrimitiveCall>, LtlError> {
    let mut out = Vec::new();
    walk_plan(f, &mut out)?;
    Ok(out)
}

fn walk_plan(f: &Formula, out: &mut Vec<PrimitiveCall>) -> Result<(), LtlError> {
    match f {
        Formula::True => Ok(()),
        Formula::Finally(body) => walk_body(body, out),
        other => Err(LtlError::NonPlanFormula(format!(
            "expected an F(...) plan skeleton, found `{other}`"
        ))),
    }
}

fn walk_body(body: &Formula, out: &mut Vec<PrimitiveCall>) -> Result<(), LtlError> {
    match body {
        Formula::And(head, tail) => {
            emit_item(head, out)?;
            walk_plan(tail, out)
        }
        other => emit_item(other, out),
    }
}

fn emit_item(item: &Formula, out: &mut Vec<PrimitiveCall>) -> Result<(), LtlError> {
    match item {
        // zero-argument atoms are condition propositions
        Formula::Atom(call) if call.args.is_empty() => {
            out.push(PrimitiveCall::new(WAIT_NAME, &[&call.name]));
            Ok(())
        }
        Formula::Atom(call) => {
            out.push(call.clone());
            Ok(())
        }
        Formula::Until(left, right) => match (left.as_ref(), right.as_ref()) {
            // (!a U c): wait for c, a follows in the tail
            (Formula::Not(inner), Formula::Atom(cond))
                if matches!(inner.as_ref(), Formula::Atom(a) if !a.args.is_empty())
                    && cond.args.is_empty() =>
            {
                out.push(PrimitiveCall::new(WAIT_NAME, &[&cond.name]));
                Ok(())
            }
            // (!c U a): a must precede c; only the action executes
            (Formula::Not(inner), Formula::Atom(action))
                if matches!(inner.as_ref(), Formula::Atom(c) if c.args.is_empty())
                    && !action.args.is_empty() =>
            {
                out.push(action.clone());
                Ok(())
            }
            _ => Err(LtlError::NonPlanFormula(format!(
                "until item `{item}` is not a wait pattern"
            ))),
        },
        // disjunction: execute the left branch
        Formula::Or(left, _) => match left.as_ref() {
            Formula::Atom(_) => emit_item(left, out),
            branch => walk_plan(branch, out),
        },
        // a prohibited action contributes no step
        Formula::Not(_) => Ok(()),
        Formula::True => Ok(()),
        other => Err(LtlError::NonPlanFormula(format!("unexpected plan item `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{evaluate, Trace};
    use crate::model::PolicyOrigin;

    fn policy(key: &str, calls: Vec<PrimitiveCall>) -> ReductionPolicy {
        ReductionPolicy::new(key, calls, PolicyOrigin::Llm)
    }

    fn or_link(left: usize, right: usize) -> ConnectiveLink {
        ConnectiveLink { kind: ConnectiveKind::Or, left, right: Some(right) }
    }

    #[test]
    fn single_identity_action() {
        let p = policy("sliceobject", vec![PrimitiveCall::new("SliceObject", &["tomato"])]);
        let f = translate(&[p], &[]).unwrap();
        assert_eq!(f.render(), "F(SliceObject(tomato))");
    }

    #[test]
    fn wait_rule_places_until() {
        let p = policy(
            "boil/egg",
            vec![
                PrimitiveCall::new("ToggleOn", &["stove"]),
                PrimitiveCall::new("Wait", &["water_boiling"]),
                PrimitiveCall::new("PickUp", &["eggs"]),
            ],
        );
        let f = translate(&[p], &[]).unwrap();
        assert_eq!(
            f.render(),
            "F(ToggleOn(stove) & F(!PickUp(eggs) U water_boiling & F(PickUp(eggs))))"
        );
    }

    #[test]
    fn trailing_wait_becomes_condition() {
        let p = policy(
            "melt/butter",
            vec![
                PrimitiveCall::new("ToggleOn", &["stove"]),
                PrimitiveCall::new("Wait", &["melted"]),
            ],
        );
        let f = translate(&[p], &[]).unwrap();
        assert_eq!(f.render(), "F(ToggleOn(stove) & F(melted))");
    }

    #[test]
    fn before_marker_constrains_predecessor() {
        let p = policy(
            "pour/batter",
            vec![
                PrimitiveCall::new("PourInto", &["batter", "pan"]),
                PrimitiveCall::new("Wait", &["before:oven_hot"]),
            ],
        );
        let f = translate(&[p], &[]).unwrap();
        assert_eq!(f.render(), "F(!oven_hot U PourInto(batter, pan))");
        assert_eq!(linearize(&f).unwrap(), vec![PrimitiveCall::new("PourInto", &["batter", "pan"])]);
    }

    #[test]
    fn or_link_merges_into_disjunction() {
        let a = policy("serve", vec![PrimitiveCall::new("PutOn", &["food", "plate"])]);
        let b = policy("chill/food", vec![PrimitiveCall::new("PutIn", &["food", "fridge"])]);
        let f = translate(&[a, b], &[or_link(0, 1)]).unwrap();
        assert_eq!(f.render(), "F(PutOn(food, plate) | PutIn(food, fridge))");
        assert_eq!(linearize(&f).unwrap(), vec![PrimitiveCall::new("PutOn", &["food", "plate"])]);
    }

    #[test]
    fn not_link_negates_block() {
        let a = policy("overmix", vec![PrimitiveCall::new("PourInto", &["bowl", "bowl"])]);
        let links = [ConnectiveLink { kind: ConnectiveKind::Not, left: 0, right: None }];
        let f = translate(&[a], &links).unwrap();
        assert_eq!(f.render(), "F(!PourInto(bowl, bowl))");
        assert_eq!(linearize(&f).unwrap(), Vec::<PrimitiveCall>::new());
    }

    #[test]
    fn dangling_link_is_an_error() {
        let a = policy("serve", vec![PrimitiveCall::new("PutOn", &["food", "plate"])]);
        let err = translate(&[a], &[or_link(0, 3)]).unwrap_err();
        assert_eq!(err, LtlError::DanglingConnective { ordinal: 3, count: 1 });
    }

    #[test]
    fn multi_action_sequencing_flattens() {
        let a = policy(
            "toast/bread",
            vec![PrimitiveCall::new("PickUp", &["bread"]), PrimitiveCall::new("PutIn", &["bread", "toaster"])],
        );
        let b = policy("serve", vec![PrimitiveCall::new("PutOn", &["bread", "plate"])]);
        let f = translate(&[a.clone(), b], &[]).unwrap();
        assert_eq!(
            f.render(),
            "F(PickUp(bread) & F(PutIn(bread, toaster) & F(PutOn(bread, plate))))"
        );
        let plan = linearize(&f).unwrap();
        assert_eq!(plan.len(), 3);
        assert_eq!(plan[0], PrimitiveCall::new("PickUp", &["bread"]));
    }

    #[test]
    fn linearize_round_trip_with_wait() {
        let calls = vec![
            PrimitiveCall::new("ToggleOn", &["stove"]),
            PrimitiveCall::new("Wait", &["water_boiling"]),
            PrimitiveCall::new("PickUp", &["eggs"]),
        ];
        let p = policy("boil/egg", calls.clone());
        let f = translate(&[p], &[]).unwrap();
        assert_eq!(linearize(&f).unwrap(), calls);
    }

    #[test]
    fn linearize_rejects_non_plan_formulas() {
        let g = Formula::parse("G(a)").unwrap();
        assert!(matches!(linearize(&g), Err(LtlError::NonPlanFormula(_))));
        let bare = Formula::parse("a & b").unwrap();
        assert!(matches!(linearize(&bare), Err(LtlError::NonPlanFormula(_))));
    }

    #[test]
    fn execution_trace_of_linearization_satisfies_formula() {
        let p = policy(
            "boil/egg",
            vec![
                PrimitiveCall::new("ToggleOn", &["stove"]),
                PrimitiveCall::new("Wait", &["water_boiling"]),
                PrimitiveCall::new("PickUp", &["eggs"]),
            ],
        );
        let f = translate(&[p], &[]).unwrap();
        let plan = linearize(&f).unwrap();
        let trace = Trace::from_states(plan.iter().map(|call| {
            if call.name == WAIT_NAME {
                vec![call.args[0].clone()]
            } else {
                vec![call.render()]
            }
        }));
        assert!(evaluate(&f, &trace));
    }
}
