//! Hybrid association rule classifier.
//!
//! Mined class association rules become boolean attributes (does the
//! transaction contain the rule's antecedent?) and an ID3 decision tree is
//! induced over them by information gain. Rules are mined on two hierarchy
//! levels, fine item codes and their coarse collapse, and attributes are
//! always evaluated against a transaction's items plus their coarse codes.

use crate::fpm::{self, AssociationRule, Item, RuleError};
use crate::label::ClassLabel;
use crate::segment::{
    coarse_item, with_coarse_items, QuantizationModel, Transaction, TransactionDB,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MODEL_VERSION: &str = "harc-1";
pub const DEFAULT_MAX_ATTRIBUTES: usize = 64;

const CLASS_COUNT: usize = ClassLabel::ALL.len();

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarcError {
    #[error("entropy of an empty record set is undefined")]
    EmptyCounts,
    #[error("training needs at least one labeled record")]
    NoRecords,
    #[error("training needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error("model version {found:?} is not supported (expected {MODEL_VERSION:?})")]
    VersionMismatch { found: String },
    #[error("malformed model: {0}")]
    Malformed(String),
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn entropy(class_counts: &[u64]) -> Result<f64, HarcError> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(HarcError::EmptyCounts);
    }
    let n = total as f64;
    let h = class_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// A labeled transaction as seen by the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    /// Sorted items, including coarse codes.
    pub items: Vec<Item>,
    pub class: ClassLabel,
}

impl Record {
    pub fn from_transaction(t: &Transaction, class: ClassLabel) -> Self {
        Self {
            items: with_coarse_items(&t.items),
            class,
        }
    }
}

/// Fires when the antecedent of its rule is contained in the transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAttribute {
    /// Index into the model's rule list.
    pub rule: usize,
    pub antecedent: Vec<Item>,
}

impl RuleAttribute {
    /// `items` must be sorted.
    pub fn evaluate(&self, items: &[Item]) -> bool {
        self.antecedent
            .iter()
            .all(|i| items.binary_search(i).is_ok())
    }
}

fn distribution<'a>(records: impl IntoIterator<Item = &'a Record>) -> [u64; CLASS_COUNT] {
    let mut d = [0u64; CLASS_COUNT];
    for r in records {
        d[r.class.index()] += 1;
    }
    d
}

/// Most frequent class; ties go to the earlier class.
fn majority(dist: &[u64; CLASS_COUNT]) -> ClassLabel {
    let mut best = 0;
    for i in 1..CLASS_COUNT {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    ClassLabel::ALL[best]
}

fn gain_of_partition(parent: &[u64; CLASS_COUNT], yes: &[u64; CLASS_COUNT]) -> f64 {
    let total: u64 = parent.iter().sum();
    let mut no = [0u64; CLASS_COUNT];
    for i in 0..CLASS_COUNT {
        no[i] = parent[i] - yes[i];
    }
    let mut g = entropy(parent).unwrap_or(0.0);
    for part in [yes, &no] {
        let n: u64 = part.iter().sum();
        if n > 0 {
            g -= n as f64 / total as f64 * entropy(part).unwrap_or(0.0);
        }
    }
    g
}

/// Information gain of splitting `records` on `attr`; 0 for no records.
pub fn gain(records: &[Record], attr: &RuleAttribute) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let parent = distribution(records);
    let yes = distribution(records.iter().filter(|r| attr.evaluate(&r.items)));
    gain_of_partition(&parent, &yes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionNode {
    Leaf {
        class: ClassLabel,
        /// Training records per class (normal, benign, malignant).
        distribution: [u64; CLASS_COUNT],
    },
    Split {
        /// Index into the attribute list.
        attribute: usize,
        when_true: Box<DecisionNode>,
        when_false: Box<DecisionNode>,
    },
}

impl DecisionNode {
    pub fn depth(&self) -> usize {
        match self {
            DecisionNode::Leaf { .. } => 0,
            DecisionNode::Split {
                when_true,
                when_false,
                ..
            } => 1 + when_true.depth().max(when_false.depth()),
        }
    }

    /// Whether some root-to-leaf path tests an attribute twice.
    pub fn has_repeated_attribute(&self) -> bool {
        fn walk(n: &DecisionNode, path: &mut Vec<usize>) -> bool {
            match n {
                DecisionNode::Leaf { .. } => false,
                DecisionNode::Split {
                    attribute,
                    when_true,
                    when_false,
                } => {
                    if path.contains(attribute) {
                        return true;
                    }
                    path.push(*attribute);
                    let rep = walk(when_true, path) || walk(when_false, path);
                    path.pop();
                    rep
                }
            }
        }
        walk(self, &mut Vec::new())
    }

    fn max_attribute(&self) -> Option<usize> {
        match self {
            DecisionNode::Leaf { .. } => None,
            DecisionNode::Split {
                attribute,
                when_true,
                when_false,
            } => [
                Some(*attribute),
                when_true.max_attribute(),
                when_false.max_attribute(),
            ]
            .into_iter()
            .flatten()
            .max(),
        }
    }
}

/// ID3 over boolean rule attributes.
///
/// A pure record set becomes a leaf, as does an exhausted attribute list
/// (majority class). Otherwise the attribute with the largest gain splits the
/// set (ties go to the earlier attribute) and each side recurses without it;
/// an empty side becomes a leaf with the parent's majority class.
pub fn induce_tree(records: &[Record], attrs: &[RuleAttribute]) -> Result<DecisionNode, HarcError> {
    if records.is_empty() {
        return Err(HarcError::NoRecords);
    }
    let fires: Vec<Vec<bool>> = attrs
        .iter()
        .map(|a| records.iter().map(|r| a.evaluate(&r.items)).collect())
        .collect();
    let all: Vec<usize> = (0..records.len()).collect();
    let remaining: Vec<usize> = (0..attrs.len()).collect();
    Ok(grow(records, &fires, &all, &remaining))
}

fn grow(
    records: &[Record],
    fires: &[Vec<bool>],
    subset: &[usize],
    remaining: &[usize],
) -> DecisionNode {
    let dist = distribution(subset.iter().map(|&i| &records[i]));
    let leaf = DecisionNode::Leaf {
        class: majority(&dist),
        distribution: dist,
    };
    if dist.iter().filter(|&&c| c > 0).count() <= 1 || remaining.is_empty() {
        return leaf;
    }

    let mut best: Option<(usize, f64)> = None;
    for (pos, &a) in remaining.iter().enumerate() {
        let yes = distribution(
            subset
                .iter()
                .filter(|&&i| fires[a][i])
                .map(|&i| &records[i]),
        );
        let g = gain_of_partition(&dist, &yes);
        if best.is_none_or(|(_, bg)| g > bg) {
            best = Some((pos, g));
        }
    }
    let (pos, _) = best.expect("remaining is non-empty");
    let attribute = remaining[pos];
    let rest: Vec<usize> = remaining
        .iter()
        .copied()
        .filter(|&a| a != attribute)
        .collect();
    let (yes, no): (Vec<usize>, Vec<usize>) = subset.iter().partition(|&&i| fires[attribute][i]);

    let branch = |part: &[usize]| {
        if part.is_empty() {
            DecisionNode::Leaf {
                class: majority(&dist),
                distribution: [0; CLASS_COUNT],
            }
        } else {
            grow(records, fires, part, &rest)
        }
    };
    DecisionNode::Split {
        attribute,
        when_true: Box::new(branch(&yes)),
        when_false: Box::new(branch(&no)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarcModel {
    pub rules: Vec<AssociationRule>,
    pub attributes: Vec<RuleAttribute>,
    pub tree: DecisionNode,
    pub quantization: Option<QuantizationModel>,
    pub default_class: ClassLabel,
}

/// Predicted class and the attributes that fired along the decision path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub class: ClassLabel,
    pub fired: Vec<usize>,
}

pub fn classify(model: &HarcModel, t: &Transaction) -> Classification {
    let items = with_coarse_items(&t.items);
    let mut node = &model.tree;
    let mut fired = Vec::new();
    loop {
        match node {
            DecisionNode::Leaf { class, .. } => {
                return Classification {
                    class: *class,
                    fired,
                }
            }
            DecisionNode::Split {
                attribute,
                when_true,
                when_false,
            } => {
                if model.attributes[*attribute].evaluate(&items) {
                    fired.push(*attribute);
                    node = when_true;
                } else {
                    node = when_false;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub minsup: f64,
    pub minconf: f64,
    pub max_attributes: usize,
    /// Optional rule pruning floor on support differences; off by default.
    pub support_gap_floor: Option<f64>,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            minsup: 0.10,
            minconf: 0.97,
            max_attributes: DEFAULT_MAX_ATTRIBUTES,
            support_gap_floor: None,
        }
    }
}

const CLASS_ITEMS: [Item; CLASS_COUNT] = [901, 902, 903];

/// Class rules from both hierarchy levels, ranked, with duplicate
/// antecedents removed (the better-ranked rule wins).
pub fn mine_hierarchical_rules(
    labeled: &[(&Transaction, ClassLabel)],
    params: &TrainParams,
) -> Result<Vec<AssociationRule>, HarcError> {
    let fine: Vec<Vec<Item>> = labeled
        .iter()
        .map(|(t, c)| {
            let mut items = t.items.clone();
            items.push(c.class_item());
            items
        })
        .collect();
    let coarse: Vec<Vec<Item>> = fine
        .iter()
        .map(|items| {
            let mut v: Vec<Item> = items.iter().map(|&i| coarse_item(i)).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();

    let mut rules = Vec::new();
    for level in [&fine, &coarse] {
        rules.extend(fpm::mine_class_rules(
            level,
            &CLASS_ITEMS,
            params.minsup,
            params.minconf,
        )?);
    }
    if let Some(floor) = params.support_gap_floor {
        rules = fpm::prune_by_support_gap(rules, floor);
    }
    rules.sort_by(AssociationRule::ranking);
    let mut seen = std::collections::HashSet::new();
    rules.retain(|r| seen.insert(r.antecedent.clone()));
    Ok(rules)
}

/// Mines rules over the labeled transactions of `db` and induces the tree.
/// Unlabeled transactions are ignored. When no rule survives, the model is a
/// single majority-class leaf.
pub fn train(db: &TransactionDB, params: &TrainParams) -> Result<HarcModel, HarcError> {
    let labeled: Vec<(&Transaction, ClassLabel)> = db
        .transactions()
        .iter()
        .filter_map(|t| t.label.map(|c| (t, c)))
        .collect();
    if labeled.is_empty() {
        return Err(HarcError::NoRecords);
    }
    let records: Vec<Record> = labeled
        .iter()
        .map(|(t, c)| Record::from_transaction(t, *c))
        .collect();
    let dist = distribution(&records);
    let classes = dist.iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(HarcError::SingleClass(classes));
    }

    let rules = mine_hierarchical_rules(&labeled, params)?;
    let attributes: Vec<RuleAttribute> = rules
        .iter()
        .enumerate()
        .take(params.max_attributes)
        .map(|(i, r)| RuleAttribute {
            rule: i,
            antecedent: r.antecedent.clone(),
        })
        .collect();
    let tree = induce_tree(&records, &attributes)?;
    Ok(HarcModel {
        rules,
        attributes,
        tree,
        quantization: None,
        default_class: majority(&dist),
    })
}

// Persisted form.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: String,
    default_class: ClassLabel,
    quantization: Option<QuantizationModel>,
    rules: Vec<RuleDoc>,
    attributes: Vec<AttributeDoc>,
    tree: NodeDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    antecedent: Vec<Item>,
    class: ClassLabel,
    support_count: u64,
    antecedent_count: u64,
    total: u64,
    support: f64,
    confidence: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    rule: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum NodeDoc {
    Leaf {
        class: ClassLabel,
        distribution: [u64; CLASS_COUNT],
    },
    Split {
        attribute: usize,
        if_true: Box<NodeDoc>,
        if_false: Box<NodeDoc>,
    },
}

fn node_to_doc(n: &DecisionNode) -> NodeDoc {
    match n {
        DecisionNode::Leaf {
            class,
            distribution,
        } => NodeDoc::Leaf {
            class: *class,
            distribution: *distribution,
        },
        DecisionNode::Split {
            attribute,
            when_true,
            when_false,
        } => NodeDoc::Split {
            attribute: *attribute,
            if_true: Box::new(node_to_doc(when_true)),
            if_false: Box::new(node_to_doc(when_false)),
        },
    }
}

fn node_from_doc(n: NodeDoc) -> DecisionNode {
    match n {
        NodeDoc::Leaf {
            class,
            distribution,
        } => DecisionNode::Leaf {
            class,
            distribution,
        },
        NodeDoc::Split {
            attribute,
            if_true,
            if_false,
        } => DecisionNode::Split {
            attribute,
            when_true: Box::new(node_from_doc(*if_true)),
            when_false: Box::new(node_from_doc(*if_false)),
        },
    }
}

impl HarcModel {
    /// Single JSON document tagged with [`MODEL_VERSION`].
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION.to_string(),
            default_class: self.default_class,
            quantization: self.quantization.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleDoc {
                    antecedent: r.antecedent.clone(),
                    class: ClassLabel::from_class_item(r.consequent).unwrap_or(self.default_class),
                    support_count: r.support_count,
                    antecedent_count: r.antecedent_count,
                    total: r.total,
                    support: r.support(),
                    confidence: r.confidence(),
                })
                .collect(),
            attributes: self
                .attributes
                .iter()
                .map(|a| AttributeDoc { rule: a.rule })
                .collect(),
            tree: node_to_doc(&self.tree),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarcError> {
        // check the version before the full schema so old models report it
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HarcError::Malformed(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(MODEL_VERSION) => {}
            Some(other) => {
                return Err(HarcError::VersionMismatch {
                    found: other.to_string(),
                })
            }
            None => return Err(HarcError::Malformed("missing version field".into())),
        }
        let doc: ModelDoc =
            serde_json::from_value(value).map_err(|e| HarcError::Malformed(e.to_string()))?;

        let mut rules = Vec::with_capacity(doc.rules.len());
        for r in doc.rules {
            if r.antecedent_count == 0
                || r.support_count > r.antecedent_count
                || r.antecedent_count > r.total
            {
                return Err(HarcError::Malformed("inconsistent rule counts".into()));
            }
            let mut antecedent = r.antecedent;
            antecedent.sort_unstable();
            antecedent.dedup();
            rules.push(AssociationRule {
                antecedent,
                consequent: r.class.class_item(),
                support_count: r.support_count,
                antecedent_count: r.antecedent_count,
                total: r.total,
            });
        }
        let mut attributes = Vec::with_capacity(doc.attributes.len());
        for a in doc.attributes {
            let rule = rules.get(a.rule).ok_or_else(|| {
                HarcError::Malformed(format!("attribute references missing rule {}", a.rule))
            })?;
            attributes.push(RuleAttribute {
                rule: a.rule,
                antecedent: rule.antecedent.clone(),
            });
        }
        let tree = node_from_doc(doc.tree);
        if let Some(max) = tree.max_attribute() {
            if max >= attributes.len() {
                return Err(HarcError::Malformed(format!(
                    "tree references missing attribute {max}"
                )));
            }
        }
        if tree.has_repeated_attribute() {
            return Err(HarcError::Malformed(
                "attribute repeated along a tree path".into(),
            ));
        }
        Ok(HarcModel {
            rules,
            attributes,
            tree,
            quantization: doc.quantization,
            default_class: doc.default_class,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(items: &[Item], class: ClassLabel) -> Record {
        Record {
            items: items.to_vec(),
            class,
        }
    }

    fn attr(antecedent: &[Item]) -> RuleAttribute {
        RuleAttribute {
            rule: 0,
            antecedent: antecedent.to_vec(),
        }
    }

    use ClassLabel::{Benign, Malignant, Normal};

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[5, 0, 0]).unwrap(), 0.0);
        assert!((entropy(&[1, 1]).unwrap() - 1.0).abs() < 1e-15);
        assert!((entropy(&[9, 5]).unwrap() - 0.940286).abs() < 1e-5);
        assert_eq!(entropy(&[0, 0]), Err(HarcError::EmptyCounts));
    }

    #[test]
    fn gain_values() {
        let recs = vec![
            rec(&[1], Benign),
            rec(&[1], Benign),
            rec(&[2], Normal),
            rec(&[2], Normal),
        ];
        assert!((gain(&recs, &attr(&[1])) - 1.0).abs() < 1e-12);
        // constant attribute
        assert_eq!(gain(&recs, &attr(&[7])), 0.0);
        let h = entropy(&[2, 2]).unwrap();
        assert!((gain(&recs, &attr(&[2])) - h).abs() < 1e-12);
    }

    #[test]
    fn pure_and_exhausted_leaves() {
        let recs = vec![rec(&[1], Benign), rec(&[2], Benign)];
        let t = induce_tree(&recs, &[attr(&[1])]).unwrap();
        assert!(matches!(t, DecisionNode::Leaf { class: Benign, .. }));

        let recs = vec![rec(&[], Normal), rec(&[], Normal), rec(&[], Benign)];
        let t = induce_tree(&recs, &[]).unwrap();
        assert_eq!(
            t,
            DecisionNode::Leaf {
                class: Normal,
                distribution: [2, 1, 0]
            }
        );
        assert_eq!(induce_tree(&[], &[]), Err(HarcError::NoRecords));
    }

    #[test]
    fn separable_fixture_splits_once() {
        let recs = vec![
            rec(&[1], Benign),
            rec(&[1], Benign),
            rec(&[2], Normal),
            rec(&[2], Normal),
        ];
        let attrs = [attr(&[7]), attr(&[1])];
        let t = induce_tree(&recs, &attrs).unwrap();
        match &t {
            DecisionNode::Split {
                attribute,
                when_true,
                when_false,
            } => {
                assert_eq!(*attribute, 1);
                assert!(matches!(
                    **when_true,
                    DecisionNode::Leaf { class: Benign, .. }
                ));
                assert!(matches!(
                    **when_false,
                    DecisionNode::Leaf { class: Normal, .. }
                ));
            }
            other => panic!("expected split, got {other:?}"),
        }
        let model = HarcModel {
            rules: vec![],
            attributes: attrs.to_vec(),
            tree: t,
            quantization: None,
            default_class: Normal,
        };
        let c = classify(&model, &Transaction::new("x", vec![1, 5], None));
        assert_eq!(
            c,
            Classification {
                class: Benign,
                fired: vec![1]
            }
        );
        let c = classify(&model, &Transaction::new("y", vec![], None));
        assert_eq!(c.class, Normal);
        assert!(c.fired.is_empty());
    }

    #[test]
    fn single_leaf_model_classifies_everything() {
        let model = HarcModel {
            rules: vec![],
            attributes: vec![],
            tree: DecisionNode::Leaf {
                class: Normal,
                distribution: [1, 0, 0],
            },
            quantization: None,
            default_class: Normal,
        };
        for items in [vec![], vec![111, 999]] {
            assert_eq!(
                classify(&model, &Transaction::new("t", items, None)).class,
                Normal
            );
        }
    }

    fn synthetic_db() -> TransactionDB {
        let mut ts = Vec::new();
        for i in 0..30 {
            let (class, item) = match i % 3 {
                0 => (Normal, 999),
                1 => (Benign, 111),
                _ => (Malignant, 122),
            };
            // shared noise items carry no class signal
            let mut items = vec![item];
            if i % 2 == 0 {
                items.push(611);
            }
            ts.push(Transaction::new(format!("{i:03}"), items, Some(class)));
        }
        TransactionDB::new(ts).unwrap()
    }

    #[test]
    fn train_on_perfect_predictors() {
        let db = synthetic_db();
        let model = train(&db, &TrainParams::default()).unwrap();
        assert!(!model.rules.is_empty());
        assert!(!model.tree.has_repeated_attribute());
        for t in db.transactions() {
            assert_eq!(classify(&model, t).class, t.label.unwrap());
        }
    }

    #[test]
    fn train_preconditions() {
        let one = TransactionDB::new(vec![
            Transaction::new("1", vec![1], Some(Benign)),
            Transaction::new("2", vec![2], Some(Benign)),
        ])
        .unwrap();
        assert_eq!(
            train(&one, &TrainParams::default()),
            Err(HarcError::SingleClass(1))
        );
        let none = TransactionDB::new(vec![Transaction::new("1", vec![1], None)]).unwrap();
        assert_eq!(
            train(&none, &TrainParams::default()),
            Err(HarcError::NoRecords)
        );
    }

    #[test]
    fn full_support_threshold_degenerates_to_majority_leaf() {
        let params = TrainParams {
            minsup: 1.0,
            ..TrainParams::default()
        };
        let model = train(&synthetic_db(), &params).unwrap();
        assert!(model.rules.is_empty());
        assert!(matches!(
            model.tree,
            DecisionNode::Leaf { class: Normal, .. }
        ));
    }

    #[test]
    fn model_json_round_trip_and_version_check() {
        let model = train(&synthetic_db(), &TrainParams::default()).unwrap();
        let json = model.to_json();
        assert!(json.contains("\"version\": \"harc-1\""));
        assert_eq!(HarcModel::from_json(&json).unwrap(), model);

        let old = json.replace("harc-1", "harc-0");
        assert_eq!(
            HarcModel::from_json(&old),
            Err(HarcError::VersionMismatch {
                found: "harc-0".into()
            })
        );
        assert!(matches!(
            HarcModel::from_json("{}"),
            Err(HarcError::Malformed(_))
        ));
        assert!(matches!(
            HarcModel::from_json("not json"),
            Err(HarcError::Malformed(_))
        ));
    }

    #[test]
    fn model_rejects_dangling_attribute() {
        let json = r#"{"version":"harc-1","default_class":"normal","quantization":null,
            "rules":[],"attributes":[],
            "tree":{"split":{"attribute":0,
                "if_true":{"leaf":{"class":"benign","distribution":[0,1,0]}},
                "if_false":{"leaf":{"class":"normal","distribution":[1,0,0]}}}}}"#;
        assert!(matches!(
            HarcModel::from_json(json),
            Err(HarcError::Malformed(_))
        ));
    }
}
