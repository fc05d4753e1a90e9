mod common;

use common::*;
use fl_auction::auction::*;
use fl_auction::model::AuctionInstance;
use proptest::prelude::*;

fn misreported(inst: &AuctionInstance, user: usize, bid: usize, factor: f64) -> AuctionInstance {
    let mut out = inst.clone();
    let b = &mut out.bids[user][bid];
    b.claimed_cost = factor * b.true_cost();
    out
}

fn utility(inst: &AuctionInstance, rule: PaymentRule, user: usize) -> f64 {
    let alloc = greedy_allocate(inst);
    critical_payments_with(inst, &alloc, rule, &mut greedy_allocate).utilities[user]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn allocations_are_feasible(users in users_of(raw_bid(60), 8, 3)) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        let (mut b, mut a) = (0, 0);
        for (k, i) in alloc.winners() {
            prop_assert!(i < inst.bids[k].len());
            prop_assert!(bid_value(&inst.bids[k][i], &inst.config) > 0.0);
            b += inst.bids[k][i].subchannels;
            a += inst.bids[k][i].antennas;
        }
        prop_assert!(b <= 100 && a <= 100);
        prop_assert_eq!((b, a), (alloc.used_b, alloc.used_a));
        prop_assert_eq!(alloc.order.len(), alloc.num_winners());
        for (k, y) in alloc.duals.y.iter().enumerate() {
            let expected = alloc.assignment[k].map_or(0.0, |i| bid_value(&inst.bids[k][i], &inst.config));
            prop_assert_eq!(*y, expected);
        }
    }

    #[test]
    fn duals_are_feasible(users in users_of(raw_bid(60), 8, 3)) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        let cert = dual_feasible(&inst, &alloc, 1e-9);
        prop_assert!(cert.feasible, "{:?}", cert);
    }

    #[test]
    fn better_bids_keep_winning(
        users in users_of(raw_bid(40), 8, 3),
        pick in any::<prop::sample::Index>(),
        bump in 0.0f64..0.5,
        shrink in 0.0f64..1.0,
    ) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        let winners: Vec<(usize, usize)> = alloc.winners().collect();
        prop_assume!(!winners.is_empty());
        let (k, i) = winners[pick.index(winners.len())];

        let mut higher = inst.clone();
        let bid = &mut higher.bids[k][i];
        bid.accuracy = (bid.accuracy + bump).min(0.999);
        prop_assert!(greedy_allocate(&higher).assignment[k].is_some());

        let mut cheaper = inst.clone();
        let bid = &mut cheaper.bids[k][i];
        bid.claimed_cost *= shrink;
        bid.subchannels = ((f64::from(bid.subchannels) * shrink) as u32).max(1);
        bid.antennas = ((f64::from(bid.antennas) * shrink) as u32).max(1);
        prop_assert!(greedy_allocate(&cheaper).assignment[k].is_some());
    }

    #[test]
    fn truthful_for_single_bid_sellers(
        users in users_of(raw_bid(40), 8, 1),
        pick in any::<prop::sample::Index>(),
        factor in 0.5f64..=2.0,
    ) {
        let inst = build(config(100, 100), &users);
        prop_assume!(!users.is_empty());
        let k = pick.index(users.len());
        let honest = utility(&inst, PaymentRule::ExactCritical, k);
        let lying = utility(&misreported(&inst, k, 0, factor), PaymentRule::ExactCritical, k);
        prop_assert!(lying <= honest + 1e-9, "honest {honest} lying {lying}");
    }

    #[test]
    fn winners_are_individually_rational(users in users_of(raw_bid(60), 8, 3)) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        for rule in [PaymentRule::DisplacedLoser, PaymentRule::ExactCritical] {
            let pay = critical_payments_with(&inst, &alloc, rule, &mut greedy_allocate);
            for (k, u) in pay.utilities.iter().enumerate() {
                match alloc.assignment[k] {
                    Some(_) => prop_assert!(*u >= -1e-9, "{rule:?} user {k}: {u}"),
                    None => prop_assert_eq!(*u, 0.0),
                }
            }
            for p in &pay.payments {
                let bid = &inst.bids[p.user][p.bid];
                prop_assert!(p.amount <= satisfaction(bid, &inst.config) + 1e-12);
            }
        }
    }

    #[test]
    fn exact_critical_never_exceeds_displaced_loser_threshold(users in users_of(raw_bid(60), 8, 3)) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        let loose = critical_payments_with(&inst, &alloc, PaymentRule::DisplacedLoser, &mut greedy_allocate);
        let tight = critical_payments_with(&inst, &alloc, PaymentRule::ExactCritical, &mut greedy_allocate);
        for (l, t) in loose.payments.iter().zip(&tight.payments) {
            prop_assert!(t.threshold >= l.threshold);
        }
    }

    #[test]
    fn one_rerun_per_winner(users in users_of(raw_bid(60), 8, 3)) {
        let inst = build(config(100, 100), &users);
        let alloc = greedy_allocate(&inst);
        let mut calls = 0usize;
        let mut counting = |i: &AuctionInstance| {
            calls += 1;
            greedy_allocate(i)
        };
        critical_payments_with(&inst, &alloc, PaymentRule::ExactCritical, &mut counting);
        prop_assert_eq!(calls, alloc.num_winners());
    }
}

#[test]
fn duals_with_zeroed_prices_are_rejected() {
    let inst = build(
        config(5, 3),
        &[
            vec![(0.10, 0.0, 3, 2)],
            vec![(0.09, 0.0, 2, 1)],
            vec![(0.04, 0.0, 2, 2)],
        ],
    );
    let mut alloc = greedy_allocate(&inst);
    alloc.duals.z = 0.0;
    alloc.duals.t = 0.0;
    let cert = dual_feasible(&inst, &alloc, 1e-9);
    assert!(!cert.feasible);
    assert_eq!(cert.violating, Some((2, 0)));
}

#[test]
fn truthful_utility_is_unchanged_by_identity_misreport() {
    let inst = build(
        config(100, 100),
        &[
            vec![(0.6, 10.0, 50, 50)],
            vec![(0.5, 5.0, 40, 40)],
            vec![(0.7, 20.0, 30, 30)],
        ],
    );
    for k in 0..3 {
        let honest = utility(&inst, PaymentRule::ExactCritical, k);
        assert_eq!(
            utility(
                &misreported(&inst, k, 0, 1.0),
                PaymentRule::ExactCritical,
                k
            ),
            honest
        );
    }
}

#[test]
fn overreporting_past_break_even_drops_out() {
    let inst = build(
        config(100, 100),
        &[vec![(0.6, 10.0, 50, 50)], vec![(0.5, 5.0, 40, 40)]],
    );
    let lying = misreported(&inst, 0, 0, 7.0);
    assert!(bid_value(&lying.bids[0][0], &lying.config) <= 0.0);
    assert_eq!(greedy_allocate(&lying).assignment[0], None);
    assert_eq!(utility(&lying, PaymentRule::ExactCritical, 0), 0.0);
}

/// The highest losing density after removing a winner can overstate its
/// critical value when the winner would not fit behind the re-run's
/// winners: a blocked seller then gains by underbidding.
#[test]
fn displaced_loser_rule_admits_a_profitable_underbid() {
    // q/s: u0 2.0 (30 units), u1 1.5 (40), u2 1.2 (40)
    let inst = build(
        config(50, 50),
        &[
            vec![(0.6, 0.0, 15, 15)],
            vec![(0.6, 0.0, 20, 20)],
            vec![(0.98, 50.0, 20, 20)],
        ],
    );
    let alloc = greedy_allocate(&inst);
    assert_eq!(alloc.assignment, vec![Some(0), Some(0), None]);
    let honest = utility(&inst, PaymentRule::DisplacedLoser, 2);
    assert_eq!(honest, 0.0);
    let lying = misreported(&inst, 2, 0, 0.5);
    let gain = utility(&lying, PaymentRule::DisplacedLoser, 2);
    assert!(gain > 1e-9, "underbid gain {gain}");
    assert!(utility(&lying, PaymentRule::ExactCritical, 2) <= 1e-9);
}

/// Sellers compete with their highest-value bid, not their densest one. A
/// seller whose big bundle is blocked can inflate that bundle's cost so the
/// small bundle is offered instead, and win with it.
#[test]
fn argmax_selection_is_open_to_menu_manipulation() {
    let inst = build(
        config(100, 100),
        &[
            vec![(0.5, 30.0, 1, 1), (0.8, 55.0, 1, 23)],
            vec![(0.9, 0.0, 40, 40)],
            vec![(0.9, 0.0, 40, 40)],
            vec![(0.9, 0.0, 30, 30)],
        ],
    );
    assert_eq!(greedy_allocate(&inst).assignment[0], None);
    assert_eq!(utility(&inst, PaymentRule::ExactCritical, 0), 0.0);

    let lying = misreported(&inst, 0, 1, 2.0);
    assert_eq!(greedy_allocate(&lying).assignment[0], Some(0));
    let gain = utility(&lying, PaymentRule::ExactCritical, 0);
    assert!((gain - 17.75).abs() < 1e-9, "gain {gain}");
}
