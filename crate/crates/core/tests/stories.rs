//! Story fixtures to story graphs.

use kgshape::kg::{KnowledgeGraph, Triple};
use kgshape::story::{
    label_frames, load_story, resolve_story, story_to_kg, FrameLexicon, StoryDocument, StoryError, StorySource,
    SHIPPED_STORIES,
};
use proptest::prelude::*;

fn graph(triples: &[(&str, &str, &str)]) -> KnowledgeGraph {
    triples.iter().map(|&(s, r, o)| Triple::new(s, r, o).unwrap()).collect()
}

fn story_graph(id: &str) -> KnowledgeGraph {
    story_to_kg(&resolve_story(id).unwrap(), &FrameLexicon::builtin()).unwrap()
}

#[test]
fn fixture_graphs() {
    let expected: &[(&str, &[(&str, &str, &str)])] = &[
        ("905_human", &[("you", "EAT_BITE", "pop-tart"), ("you", "WASH_CLEAN", "shower")]),
        ("shopping_human", &[("you", "TAKE", "coupon"), ("you", "TRY", "clothes")]),
        (
            "see_doctor_human",
            &[
                ("you", "BUY", "medicine"),
                ("you", "DRINK", "hot water"),
                ("you", "SEE", "doctor"),
                ("you", "TAKE", "prescription"),
                ("you", "WASH_CLEAN", "shower"),
                ("you", "in", "hospital"),
            ],
        ),
        (
            "shopping_llm_directory",
            &[
                ("you", "BUY", "clothes"),
                ("you", "SEE", "directory listings"),
                ("you", "TRY", "clothes"),
                ("you", "in", "mall"),
                ("you", "in", "store"),
            ],
        ),
        (
            "light_thief",
            &[
                ("you", "TAKE", "gold bars"),
                ("you", "TAKE", "small sack of gold"),
                ("you", "in", "hillside manor"),
                ("you", "in", "meadow"),
                ("you", "in", "sermon hall"),
                ("you", "in", "wealthy area of town"),
            ],
        ),
        (
            "light_thug",
            &[("you", "HIT", "watch maker"), ("you", "TAKE", "revenge"), ("you", "in", "meadow")],
        ),
        (
            "light_bum",
            &[("you", "TAKE", "coins"), ("you", "TAKE", "donations"), ("you", "in", "meadow")],
        ),
    ];
    for (id, triples) in expected {
        assert_eq!(story_graph(id), graph(triples), "{id}");
    }
}

#[test]
fn adventurer_story_lists_the_gear_and_the_loot() {
    let g = story_graph("light_adventurer");
    for item in ["sword", "shield", "armor", "bow", "gold", "jewelry", "gold cups", "golden goblet"] {
        assert!(g.contains(&Triple::new("you", "TAKE", item).unwrap()), "{item}");
    }
    assert!(g.contains(&Triple::new("you", "in", "meadow").unwrap()));
}

#[test]
fn worked_example() {
    let lex = FrameLexicon::builtin();
    let g = story_to_kg(&StoryDocument::new("I drink coffee in the kitchen."), &lex).unwrap();
    assert_eq!(g, graph(&[("you", "DRINK", "coffee"), ("you", "in", "kitchen")]));

    let (frames, _) = label_frames("Jenny lived in Georgia", &lex);
    assert_eq!(frames.len(), 1);
    assert_eq!(
        (frames[0].frame.as_str(), frames[0].agent.as_str(), frames[0].location.as_deref()),
        ("EXIST_LIVE", "jenny", Some("georgia"))
    );

    let (frames, skipped) = label_frames("The weather was nice.", &lex);
    assert!(frames.is_empty());
    assert!(!skipped.is_empty());
}

#[test]
fn headers_and_sources() {
    let doc = resolve_story("905_human").unwrap();
    assert_eq!(doc.persona, None);
    assert_eq!(doc.source, StorySource::Human);
    let doc = resolve_story("light_thief").unwrap();
    assert_eq!(doc.persona.as_deref(), Some("thief"));
    assert_eq!(resolve_story("905_llm_1").unwrap().source, StorySource::LlmFixture);
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_story("/nonexistent/story.txt"), Err(StoryError::Io(_))));
}

#[test]
fn a_story_without_frames_is_empty() {
    let lex = FrameLexicon::builtin();
    assert!(matches!(
        story_to_kg(&StoryDocument::new("The weather was nice."), &lex),
        Err(StoryError::EmptyStory)
    ));
}

#[test]
fn every_fixture_uses_lexicon_relations() {
    let lex = FrameLexicon::builtin();
    let frames = lex.frames();
    for (id, _) in SHIPPED_STORIES {
        for t in story_graph(id).iter() {
            let r = t.relation();
            assert!(frames.contains(r) || r == "in" || r == "at-time", "{id}: {t}");
        }
    }
}

proptest! {
    #[test]
    fn sentence_order_does_not_matter(fixture in 0..SHIPPED_STORIES.len(), seed in any::<u64>()) {
        let lex = FrameLexicon::builtin();
        let doc = resolve_story(SHIPPED_STORIES[fixture].0).unwrap();
        let mut sentences = kgshape::story::sentences(&doc.text);
        // Deterministic shuffle driven by the seed.
        let mut s = seed;
        for i in (1..sentences.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            sentences.swap(i, (s >> 33) as usize % (i + 1));
        }
        let shuffled = StoryDocument::new(sentences.join(" "));
        prop_assert_eq!(story_to_kg(&shuffled, &lex).unwrap(), story_to_kg(&doc, &lex).unwrap());
    }
}
