mod common;

use std::fs;

use common::fixture;
use vsprobe::corpus::{
    generate_synthetic_corpus, load_corpus, load_splits, save_corpus, CaptionId, CategoryId,
    CrowdPolicy, ImageId, Split, SplitAssignment,
};
use vsprobe::tasks::bin_num_objects;
use vsprobe::Error;

fn coco() -> vsprobe::corpus::CorpusIndex {
    load_corpus(fixture("coco/instances.json"), fixture("coco/captions.json")).unwrap()
}

#[test]
fn loads_coco_files() {
    let c = coco();
    assert_eq!(c.images().len(), 6);
    assert_eq!(c.captions().len(), 12);
    assert_eq!(c.categories().len(), 3);
    assert_eq!(c.supercategories().into_iter().collect::<Vec<_>>(), ["animal", "person", "vehicle"]);
    // `k` ranks captions by their source id, not file order.
    let first = c.caption(&CaptionId("cap:1#0".into())).unwrap();
    assert_eq!(first.text, "A person waiting for the bus.");
    assert_eq!(c.captions_of(&ImageId::from_number(2)).len(), 2);
}

#[test]
fn counts_and_categories() {
    let c = coco();
    let img = ImageId::from_number;
    assert_eq!(c.count_object_instances(&img(2)).unwrap(), 2);
    assert_eq!(c.count_object_instances(&img(4)).unwrap(), 7);
    assert_eq!(c.count_object_instances_with(&img(4), CrowdPolicy::Exclude).unwrap(), 6);
    assert_eq!(c.count_object_instances(&img(5)).unwrap(), 0);
    assert_eq!(bin_num_objects(c.count_object_instances(&img(6)).unwrap()), 5);
    assert_eq!(c.categories_present(&img(2)).unwrap().into_iter().collect::<Vec<_>>(), [CategoryId(18)]);
    assert_eq!(c.categories_present(&img(3)).unwrap().len(), 2);
    assert!(matches!(c.count_object_instances(&img(99)), Err(Error::Lookup { .. })));
}

#[test]
fn splits_load_by_number() {
    let c = coco();
    let s = load_splits(fixture("coco/splits.json"), &c).unwrap();
    assert_eq!(s.get(&ImageId::from_number(4)), Some(Split::Validation));
    assert_eq!(s.sizes()[&Split::Test], 2);
}

#[test]
fn dangling_references_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let caps = dir.path().join("c.json");
    fs::write(&inst, r#"{"images":[{"id":1}],"annotations":[{"image_id":2,"category_id":1}],"categories":[{"id":1,"name":"person"}]}"#).unwrap();
    fs::write(&caps, r#"{"annotations":[]}"#).unwrap();
    assert!(matches!(load_corpus(&inst, &caps), Err(Error::Integrity(_))));

    fs::write(&inst, r#"{"images":[{"id":1}],"categories":[]}"#).unwrap();
    fs::write(&caps, r#"{"annotations":[{"id":1,"image_id":1,"caption":"a"},{"id":1,"image_id":1,"caption":"b"}]}"#).unwrap();
    assert!(matches!(load_corpus(&inst, &caps), Err(Error::Integrity(_))));

    fs::write(&caps, "{not json").unwrap();
    assert!(matches!(load_corpus(&inst, &caps), Err(Error::Parse { .. })));
}

#[test]
fn synthetic_corpus_round_trips() {
    let (corpus, truth) = generate_synthetic_corpus(30, 40, 11);
    for g in &truth {
        assert_eq!(corpus.count_object_instances(&g.image).unwrap(), g.count);
        assert_eq!(corpus.categories_present(&g.image).unwrap(), g.categories);
    }
    let dir = tempfile::tempdir().unwrap();
    let (i, c) = (dir.path().join("i.json"), dir.path().join("c.json"));
    save_corpus(&corpus, &i, &c).unwrap();
    assert_eq!(load_corpus(&i, &c).unwrap(), corpus);

    let split = SplitAssignment::random(&corpus, 0.6, 0.2, 1);
    let p = dir.path().join("s.json");
    split.save(&p).unwrap();
    assert_eq!(load_splits(&p, &corpus).unwrap(), split);
}

#[test]
fn synthetic_corpus_is_deterministic() {
    assert_eq!(generate_synthetic_corpus(20, 40, 3), generate_synthetic_corpus(20, 40, 3));
    assert_ne!(generate_synthetic_corpus(20, 40, 3).0, generate_synthetic_corpus(20, 40, 4).0);
}
