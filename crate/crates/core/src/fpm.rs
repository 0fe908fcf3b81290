//! FP-tree construction, top-down maximal frequent itemset search and
//! class association rule generation.
//!
//! The tree keeps the classic layout: every node carries its item, a count,
//! a parent link, its children and a node-link to the next node holding the
//! same item; the header table lists frequent items by descending support
//! (ties by ascending item code) with the head of each node-link chain.
//!
//! Maximal itemsets are found top-down. Candidates are grouped by their last
//! item in header order, starting from the least frequent. For last item `j`
//! the search starts from the largest candidate that can possibly be
//! frequent: `j` plus every earlier item whose co-occurrence with `j` reaches
//! the support threshold. Each level is counted against the tree; frequent
//! candidates not covered by an already accepted maximal set are accepted,
//! infrequent ones are replaced by their subsets that drop one item other
//! than `j`, skipping subsets of accepted sets.

use crate::label::ClassLabel;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use thiserror::Error;

pub type Item = u32;

/// Slack used when comparing count ratios against fractional thresholds.
const RATIO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule generation needs class items, but none were given")]
    NoClassItems,
    #[error("{name} must lie in (0, 1], got {value}")]
    BadFraction { name: &'static str, value: f64 },
}

/// Sorted, duplicate-free item set with its support count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Itemset {
    pub items: Vec<Item>,
    pub support: u64,
}

/// Converts a fractional minimum support into a count: `ceil(minsup * n)`,
/// at least 1.
pub fn minsup_count(minsup: f64, n: usize) -> u64 {
    let raw = (minsup * n as f64 - RATIO_EPS).ceil();
    if raw < 1.0 {
        1
    } else {
        raw as u64
    }
}

fn check_fraction(name: &'static str, value: f64) -> Result<(), RuleError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(RuleError::BadFraction { name, value })
    }
}

/// Items with support `>= minsup_count`, by descending support then
/// ascending item code. Repeated items inside one transaction count once.
pub fn frequent_items<T: AsRef<[Item]>>(transactions: &[T], minsup_count: u64) -> Vec<(Item, u64)> {
    let mut counts: HashMap<Item, u64> = HashMap::new();
    let mut scratch = Vec::new();
    for t in transactions {
        scratch.clear();
        scratch.extend_from_slice(t.as_ref());
        scratch.sort_unstable();
        scratch.dedup();
        for &i in &scratch {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut out: Vec<(Item, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= minsup_count.max(1))
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpNode {
    /// `None` only for the root.
    pub item: Option<Item>,
    pub count: u64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Next node carrying the same item.
    pub link: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderEntry {
    pub item: Item,
    pub support: u64,
    pub head: Option<usize>,
    tail: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FpTree {
    nodes: Vec<FpNode>,
    header: Vec<HeaderEntry>,
    rank: HashMap<Item, usize>,
    transaction_count: u64,
}

impl FpTree {
    pub const ROOT: usize = 0;

    pub fn nodes(&self) -> &[FpNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &FpNode {
        &self.nodes[i]
    }

    pub fn header(&self) -> &[HeaderEntry] {
        &self.header
    }

    pub fn transaction_count(&self) -> u64 {
        self.transaction_count
    }

    /// Position of `item` in the header, 0 being the most frequent.
    pub fn rank(&self, item: Item) -> Option<usize> {
        self.rank.get(&item).copied()
    }

    /// Node indices along the node-link chain of the item at header `rank`.
    pub fn chain(&self, rank: usize) -> ChainIter<'_> {
        ChainIter {
            tree: self,
            next: self.header.get(rank).and_then(|h| h.head),
        }
    }

    /// Child of `parent` holding `item`.
    pub fn child(&self, parent: usize, item: Item) -> Option<usize> {
        self.nodes[parent]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].item == Some(item))
    }

    fn node_rank(&self, i: usize) -> usize {
        let item = self.nodes[i].item.expect("non-root node");
        self.rank[&item]
    }

    fn insert(&mut self, ranks: &[usize]) {
        let mut cur = Self::ROOT;
        for &r in ranks {
            let item = self.header[r].item;
            cur = match self.child(cur, item) {
                Some(c) => {
                    self.nodes[c].count += 1;
                    c
                }
                None => {
                    let idx = self.nodes.len();
                    self.nodes.push(FpNode {
                        item: Some(item),
                        count: 1,
                        parent: Some(cur),
                        children: Vec::new(),
                        link: None,
                    });
                    self.nodes[cur].children.push(idx);
                    let entry = &mut self.header[r];
                    match entry.tail {
                        Some(t) => self.nodes[t].link = Some(idx),
                        None => entry.head = Some(idx),
                    }
                    self.header[r].tail = Some(idx);
                    idx
                }
            };
        }
    }

    /// Support of `items` counted on the tree: walk the chain of its least
    /// frequent item and sum the counts of nodes whose root-ward path holds
    /// all the other items. Items missing from the header give 0; the empty
    /// set is supported by every transaction.
    pub fn itemset_support(&self, items: &[Item]) -> u64 {
        if items.is_empty() {
            return self.transaction_count;
        }
        let mut ranks = Vec::with_capacity(items.len());
        for i in items {
            match self.rank(*i) {
                Some(r) => ranks.push(r),
                None => return 0,
            }
        }
        ranks.sort_unstable();
        ranks.dedup();
        self.support_of_ranks(&ranks)
    }

    /// `ranks` ascending and duplicate-free.
    fn support_of_ranks(&self, ranks: &[usize]) -> u64 {
        let Some((&last, rest)) = ranks.split_last() else {
            return self.transaction_count;
        };
        let mut total = 0;
        for node in self.chain(last) {
            if self.path_contains(node, rest) {
                total += self.nodes[node].count;
            }
        }
        total
    }

    /// Whether the ancestors of `node` hold every rank in `wanted` (ascending).
    /// Ranks strictly decrease towards the root, so the walk stops early.
    fn path_contains(&self, node: usize, wanted: &[usize]) -> bool {
        let mut need = wanted.len();
        let mut cur = self.nodes[node].parent;
        while need > 0 {
            let Some(p) = cur else { return false };
            if p == Self::ROOT {
                return false;
            }
            let r = self.node_rank(p);
            match r.cmp(&wanted[need - 1]) {
                Ordering::Equal => need -= 1,
                Ordering::Less => return false,
                Ordering::Greater => {}
            }
            cur = self.nodes[p].parent;
        }
        true
    }

    /// Every root-to-leaf path as item lists.
    pub fn paths(&self) -> Vec<Vec<(Item, u64)>> {
        let mut out = Vec::new();
        let mut stack = vec![(Self::ROOT, Vec::new())];
        while let Some((n, path)) = stack.pop() {
            let node = &self.nodes[n];
            if node.children.is_empty() && n != Self::ROOT {
                out.push(path);
                continue;
            }
            for &c in node.children.iter().rev() {
                let mut p = path.clone();
                p.push((self.nodes[c].item.expect("non-root"), self.nodes[c].count));
                stack.push((c, p));
            }
        }
        out
    }
}

pub struct ChainIter<'a> {
    tree: &'a FpTree,
    next: Option<usize>,
}

impl Iterator for ChainIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let cur = self.next?;
        self.next = self.tree.nodes[cur].link;
        Some(cur)
    }
}

/// Inserts every transaction, filtered to the items of `frequent` and
/// reordered by it, into a fresh tree.
pub fn build_fp_tree<T: AsRef<[Item]>>(transactions: &[T], frequent: &[(Item, u64)]) -> FpTree {
    let header: Vec<HeaderEntry> = frequent
        .iter()
        .map(|&(item, support)| HeaderEntry {
            item,
            support,
            head: None,
            tail: None,
        })
        .collect();
    let rank = frequent
        .iter()
        .enumerate()
        .map(|(r, &(item, _))| (item, r))
        .collect();
    let mut tree = FpTree {
        nodes: vec![FpNode {
            item: None,
            count: 0,
            parent: None,
            children: Vec::new(),
            link: None,
        }],
        header,
        rank,
        transaction_count: transactions.len() as u64,
    };
    let mut ranks = Vec::new();
    for t in transactions {
        ranks.clear();
        ranks.extend(t.as_ref().iter().filter_map(|i| tree.rank(*i)));
        ranks.sort_unstable();
        ranks.dedup();
        tree.insert(&ranks);
    }
    tree
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

/// Maximal frequent itemsets of the tree at `minsup_count`, sorted by items.
pub fn mine_mfi(tree: &FpTree, minsup_count: u64) -> Vec<Itemset> {
    let minsup = minsup_count.max(1);
    let k = tree.header.len();
    let mut accepted: Vec<(Vec<usize>, u64)> = Vec::new();
    let mut co_counts = vec![0u64; k];

    for last in (0..k).rev() {
        if tree.header[last].support < minsup {
            continue;
        }
        co_counts.iter_mut().for_each(|c| *c = 0);
        for node in tree.chain(last) {
            let count = tree.nodes[node].count;
            let mut cur = tree.nodes[node].parent;
            while let Some(p) = cur {
                if p == FpTree::ROOT {
                    break;
                }
                co_counts[tree.node_rank(p)] += count;
                cur = tree.nodes[p].parent;
            }
        }
        let mut seed: Vec<usize> = (0..last).filter(|&r| co_counts[r] >= minsup).collect();
        seed.push(last);

        let mut level = BTreeSet::from([seed]);
        while !level.is_empty() {
            let mut next = BTreeSet::new();
            for cand in level {
                if accepted.iter().any(|(m, _)| is_subset(&cand, m)) {
                    continue;
                }
                let support = tree.support_of_ranks(&cand);
                if support >= minsup {
                    accepted.push((cand, support));
                    continue;
                }
                // the last item stays; dropping it moves the set to another family
                for drop in 0..cand.len() - 1 {
                    let mut sub = cand.clone();
                    sub.remove(drop);
                    if !accepted.iter().any(|(m, _)| is_subset(&sub, m)) {
                        next.insert(sub);
                    }
                }
            }
            level = next;
        }
    }

    let mut out: Vec<Itemset> = accepted
        .into_iter()
        .map(|(ranks, support)| {
            let mut items: Vec<Item> = ranks.iter().map(|&r| tree.header[r].item).collect();
            items.sort_unstable();
            Itemset { items, support }
        })
        .collect();
    out.sort();
    out
}

/// Every non-empty subset of the maximal sets, each with its tree support,
/// ordered by size and then items.
pub fn frequent_closure(mfi: &[Itemset], tree: &FpTree) -> Vec<Itemset> {
    let mut family: BTreeSet<Vec<Item>> = BTreeSet::new();
    for m in mfi {
        let n = m.items.len();
        assert!(
            n < 64,
            "maximal itemset of {n} items is too large to enumerate"
        );
        for mask in 1u64..(1u64 << n) {
            let subset: Vec<Item> = (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| m.items[b])
                .collect();
            family.insert(subset);
        }
    }
    let mut out: Vec<Itemset> = family
        .into_iter()
        .map(|items| {
            let support = tree.itemset_support(&items);
            Itemset { items, support }
        })
        .collect();
    out.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then_with(|| a.items.cmp(&b.items))
    });
    out
}

/// Class association rule `antecedent -> consequent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationRule {
    pub antecedent: Vec<Item>,
    pub consequent: Item,
    /// Transactions holding antecedent and consequent.
    pub support_count: u64,
    /// Transactions holding the antecedent.
    pub antecedent_count: u64,
    /// Size of the database.
    pub total: u64,
}

impl AssociationRule {
    pub fn support(&self) -> f64 {
        self.support_count as f64 / self.total as f64
    }

    pub fn confidence(&self) -> f64 {
        self.support_count as f64 / self.antecedent_count as f64
    }

    /// Confidence descending, support descending, antecedent ascending,
    /// consequent ascending. Confidences compare as exact fractions.
    pub fn ranking(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.support_count) * u128::from(other.antecedent_count);
        let rhs = u128::from(other.support_count) * u128::from(self.antecedent_count);
        rhs.cmp(&lhs)
            .then_with(|| other.support_count.cmp(&self.support_count))
            .then_with(|| self.antecedent.cmp(&other.antecedent))
            .then_with(|| self.consequent.cmp(&other.consequent))
    }
}

/// Emits `X -> c` for every frequent `X ∪ {c}` holding exactly one class
/// item `c` and a non-empty class-free `X`, when its support fraction reaches
/// `minsup` and its confidence reaches `minconf`.
pub fn generate_rules(
    frequent: &[Itemset],
    total: u64,
    class_items: &[Item],
    minsup: f64,
    minconf: f64,
) -> Result<Vec<AssociationRule>, RuleError> {
    if class_items.is_empty() {
        return Err(RuleError::NoClassItems);
    }
    check_fraction("minsup", minsup)?;
    check_fraction("minconf", minconf)?;
    let supports: HashMap<&[Item], u64> = frequent
        .iter()
        .map(|s| (s.items.as_slice(), s.support))
        .collect();
    let mut rules = Vec::new();
    for set in frequent {
        let classes: Vec<Item> = set
            .items
            .iter()
            .copied()
            .filter(|i| class_items.contains(i))
            .collect();
        if classes.len() != 1 || set.items.len() < 2 {
            continue;
        }
        let consequent = classes[0];
        let antecedent: Vec<Item> = set
            .items
            .iter()
            .copied()
            .filter(|&i| i != consequent)
            .collect();
        let Some(&antecedent_count) = supports.get(antecedent.as_slice()) else {
            continue;
        };
        if total == 0 || antecedent_count == 0 {
            continue;
        }
        let support = set.support as f64 / total as f64;
        let confidence = set.support as f64 / antecedent_count as f64;
        if support + RATIO_EPS >= minsup && confidence + RATIO_EPS >= minconf {
            rules.push(AssociationRule {
                antecedent,
                consequent,
                support_count: set.support,
                antecedent_count,
                total,
            });
        }
    }
    rules.sort_by(AssociationRule::ranking);
    Ok(rules)
}

/// Drops a rule when a rule with the same consequent and a strictly smaller
/// antecedent has a support within `floor` of it.
pub fn prune_by_support_gap(rules: Vec<AssociationRule>, floor: f64) -> Vec<AssociationRule> {
    let keep: Vec<bool> = rules
        .iter()
        .map(|r| {
            !rules.iter().any(|g| {
                g.consequent == r.consequent
                    && g.antecedent.len() < r.antecedent.len()
                    && g.antecedent.iter().all(|i| r.antecedent.contains(i))
                    && (g.support() - r.support()).abs() < floor
            })
        })
        .collect();
    rules
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Frequent items, tree and maximal sets of one mining pass.
#[derive(Debug, Clone)]
pub struct MiningOutcome {
    pub frequent_items: Vec<(Item, u64)>,
    pub tree: FpTree,
    pub mfi: Vec<Itemset>,
}

pub fn mine_maximal<T: AsRef<[Item]>>(transactions: &[T], minsup_count: u64) -> MiningOutcome {
    let frequent_items = frequent_items(transactions, minsup_count);
    let tree = build_fp_tree(transactions, &frequent_items);
    let mfi = mine_mfi(&tree, minsup_count);
    MiningOutcome {
        frequent_items,
        tree,
        mfi,
    }
}

/// Full rule pipeline over transactions that already carry class items.
pub fn mine_class_rules<T: AsRef<[Item]>>(
    transactions: &[T],
    class_items: &[Item],
    minsup: f64,
    minconf: f64,
) -> Result<Vec<AssociationRule>, RuleError> {
    if class_items.is_empty() {
        return Err(RuleError::NoClassItems);
    }
    check_fraction("minsup", minsup)?;
    check_fraction("minconf", minconf)?;
    let count = minsup_count(minsup, transactions.len());
    let outcome = mine_maximal(transactions, count);
    let family = frequent_closure(&outcome.mfi, &outcome.tree);
    generate_rules(
        &family,
        transactions.len() as u64,
        class_items,
        minsup,
        minconf,
    )
}

fn join_items(items: &[Item]) -> String {
    let mut s = String::new();
    for (k, i) in items.iter().enumerate() {
        if k > 0 {
            s.push(';');
        }
        let _ = write!(s, "{i}");
    }
    s
}

fn class_name(item: Item) -> String {
    ClassLabel::from_class_item(item).map_or_else(|| item.to_string(), |c| c.as_str().to_string())
}

/// `antecedent,class,support,confidence` with 6-decimal fractions.
pub fn rules_to_csv(rules: &[AssociationRule]) -> String {
    let mut out = String::from("antecedent,class,support,confidence\n");
    for r in rules {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            join_items(&r.antecedent),
            class_name(r.consequent),
            r.support(),
            r.confidence()
        );
    }
    out
}

/// `itemset,support` rows.
pub fn itemsets_to_csv(sets: &[Itemset]) -> String {
    let mut out = String::from("itemset,support\n");
    for s in sets {
        let _ = writeln!(out, "{},{}", join_items(&s.items), s.support);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The seven transactions of the worked example, with the two-digit item `11` kept unchanged.
    pub(crate) fn fixture() -> Vec<Vec<Item>> {
        vec![
            vec![111, 121, 211, 221],
            vec![11, 211, 222, 323],
            vec![112, 122, 221, 421],
            vec![111, 121, 421],
            vec![111, 122, 211, 221, 413],
            vec![211, 323, 524, 413],
            vec![323, 524, 713],
        ]
    }

    fn set(items: &[Item]) -> Vec<Item> {
        items.to_vec()
    }

    #[test]
    fn frequent_items_of_fixture() {
        let l = frequent_items(&fixture(), 3);
        assert_eq!(l, vec![(211, 4), (111, 3), (221, 3), (323, 3)]);
        assert!(frequent_items(&fixture(), 8).is_empty());
        assert_eq!(frequent_items(&[vec![5, 2]], 1), vec![(2, 1), (5, 1)]);
    }

    #[test]
    fn tree_shape_for_fixture() {
        let t = fixture();
        let l = frequent_items(&t, 3);
        let tree = build_fp_tree(&t, &l);
        let root = FpTree::ROOT;
        let n211 = tree.child(root, 211).unwrap();
        assert_eq!(tree.node(n211).count, 4);
        let n111 = tree.child(n211, 111).unwrap();
        assert_eq!(tree.node(n111).count, 2);
        assert_eq!(tree.node(tree.child(n111, 221).unwrap()).count, 2);
        assert_eq!(tree.node(tree.child(n211, 323).unwrap()).count, 2);
        assert_eq!(tree.node(tree.child(root, 221).unwrap()).count, 1);
        assert_eq!(tree.node(tree.child(root, 111).unwrap()).count, 1);
        assert_eq!(tree.node(tree.child(root, 323).unwrap()).count, 1);
        assert_eq!(tree.node(root).children.len(), 4);
        for (r, h) in tree.header().iter().enumerate() {
            let sum: u64 = tree.chain(r).map(|n| tree.node(n).count).sum();
            assert_eq!(sum, h.support);
        }
    }

    #[test]
    fn empty_and_repeated_databases() {
        let empty: Vec<Vec<Item>> = Vec::new();
        let tree = build_fp_tree(&empty, &frequent_items(&empty, 1));
        assert_eq!(tree.nodes().len(), 1);
        assert!(tree.header().is_empty());
        assert_eq!(tree.itemset_support(&[4]), 0);
        assert!(mine_mfi(&tree, 1).is_empty());

        let same = vec![vec![1, 2, 3]; 5];
        let tree = build_fp_tree(&same, &frequent_items(&same, 1));
        assert_eq!(tree.paths(), vec![vec![(1, 5), (2, 5), (3, 5)]]);
    }

    #[test]
    fn support_on_fixture_tree() {
        let t = fixture();
        let tree = build_fp_tree(&t, &frequent_items(&t, 3));
        assert_eq!(tree.itemset_support(&[211]), 4);
        assert_eq!(tree.itemset_support(&[111, 221]), 2);
        assert_eq!(tree.itemset_support(&[111, 999]), 0);
        assert_eq!(tree.itemset_support(&[]), 7);
    }

    #[test]
    fn mfi_of_fixture() {
        let t = fixture();
        let out = mine_maximal(&t, 3);
        let sets: Vec<Vec<Item>> = out.mfi.iter().map(|s| s.items.clone()).collect();
        assert_eq!(
            sets,
            vec![set(&[111]), set(&[211]), set(&[221]), set(&[323])]
        );

        let out = mine_maximal(&t, 2);
        let mut sets: Vec<Vec<Item>> = out.mfi.iter().map(|s| s.items.clone()).collect();
        sets.sort();
        let mut expected = vec![
            set(&[111, 211, 221]),
            set(&[111, 121]),
            set(&[211, 323]),
            set(&[211, 413]),
            set(&[122, 221]),
            set(&[323, 524]),
            set(&[421]),
        ];
        expected.sort();
        assert_eq!(sets, expected);
        assert!(out.mfi.iter().all(|s| s.support == 2));
    }

    #[test]
    fn closure_of_single_pair() {
        let t = vec![vec![1, 2], vec![1, 2], vec![1]];
        let out = mine_maximal(&t, 2);
        assert_eq!(
            out.mfi,
            vec![Itemset {
                items: vec![1, 2],
                support: 2
            }]
        );
        let fam = frequent_closure(&out.mfi, &out.tree);
        assert_eq!(
            fam,
            vec![
                Itemset {
                    items: vec![1],
                    support: 3
                },
                Itemset {
                    items: vec![2],
                    support: 2
                },
                Itemset {
                    items: vec![1, 2],
                    support: 2
                },
            ]
        );
    }

    #[test]
    fn minsup_count_uses_ceiling() {
        assert_eq!(minsup_count(0.1, 30), 3);
        assert_eq!(minsup_count(0.1, 7), 1);
        assert_eq!(minsup_count(0.1, 42), 5);
        assert_eq!(minsup_count(1.0, 42), 42);
        assert_eq!(minsup_count(0.001, 10), 1);
    }

    fn labeled(rows: &[(&[Item], Item)]) -> Vec<Vec<Item>> {
        rows.iter()
            .map(|(items, c)| {
                let mut v = items.to_vec();
                v.push(*c);
                v
            })
            .collect()
    }

    #[test]
    fn perfect_and_broken_association() {
        let mut rows: Vec<(&[Item], Item)> = vec![(&[1], 901); 3];
        rows.extend(vec![(&[2][..], 902); 7]);
        let db = labeled(&rows);
        let rules = mine_class_rules(&db, &[901, 902, 903], 0.1, 0.97).unwrap();
        let r = rules.iter().find(|r| r.antecedent == vec![1]).unwrap();
        assert_eq!(r.consequent, 901);
        assert!((r.support() - 0.3).abs() < 1e-12);
        assert_eq!(r.confidence(), 1.0);

        let mut rows: Vec<(&[Item], Item)> = vec![(&[1], 901); 2];
        rows.push((&[1], 903));
        rows.extend(vec![(&[2][..], 902); 7]);
        let rules = mine_class_rules(&labeled(&rows), &[901, 902, 903], 0.1, 0.97).unwrap();
        assert!(rules.iter().all(|r| r.antecedent != vec![1]));
    }

    #[test]
    fn rule_generation_needs_classes_and_valid_fractions() {
        assert_eq!(
            generate_rules(&[], 3, &[], 0.1, 0.9),
            Err(RuleError::NoClassItems)
        );
        assert!(matches!(
            generate_rules(&[], 3, &[901], 0.1, 1.01),
            Err(RuleError::BadFraction {
                name: "minconf",
                ..
            })
        ));
    }

    #[test]
    fn support_gap_pruning() {
        let general = AssociationRule {
            antecedent: vec![1],
            consequent: 901,
            support_count: 30,
            antecedent_count: 30,
            total: 100,
        };
        let specific = AssociationRule {
            antecedent: vec![1, 2],
            support_count: 30,
            antecedent_count: 30,
            ..general.clone()
        };
        let kept = prune_by_support_gap(vec![general.clone(), specific.clone()], 0.001);
        assert_eq!(kept, vec![general.clone()]);
        let distinct = AssociationRule {
            support_count: 20,
            antecedent_count: 20,
            ..specific
        };
        assert_eq!(
            prune_by_support_gap(vec![general, distinct], 0.001).len(),
            2
        );
    }

    #[test]
    fn csv_exports() {
        let r = AssociationRule {
            antecedent: vec![111, 221],
            consequent: 902,
            support_count: 1,
            antecedent_count: 3,
            total: 7,
        };
        assert_eq!(
            rules_to_csv(&[r]),
            "antecedent,class,support,confidence\n111;221,benign,0.142857,0.333333\n"
        );
        let s = Itemset {
            items: vec![3, 9],
            support: 2,
        };
        assert_eq!(itemsets_to_csv(&[s]), "itemset,support\n3;9,2\n");
    }
}
