use kgshape::game::search::{all_actions, shortest_win};
use kgshape::game::{Game, GameError, GameMode, GameSpec, SHIPPED_GAMES};

fn game(id: &str, mode: GameMode) -> Game {
    Game::new(GameSpec::shipped(id).unwrap(), mode)
}

fn play(g: &Game, actions: &[&str]) -> kgshape::game::GameState {
    let (mut s, _) = g.reset(0);
    for a in actions {
        g.step(&mut s, a).unwrap();
    }
    s
}

#[test]
fn every_shipped_game_is_solvable() {
    for (id, _) in SHIPPED_GAMES {
        let spec = GameSpec::shipped(id).unwrap();
        let path = shortest_win(&spec).unwrap_or_else(|| panic!("{id} unsolvable"));
        let g = Game::new(spec, GameMode::Train);
        let s = play(&g, &path.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(s.won && s.done, "{id}: BFS path {path:?} does not win");
    }
}

#[test]
fn shortest_paths_have_expected_lengths() {
    let len = |id: &str| shortest_win(&GameSpec::shipped(id).unwrap()).unwrap().len();
    assert_eq!(len("905"), 3);
    assert_eq!(len("shopping"), 4);
    assert_eq!(len("see_doctor"), 4);
    assert_eq!(len("light_gold"), 5);
}

#[test]
fn shopping_story_route_scores_both_cs_rules() {
    let g = game("shopping", GameMode::Test);
    let s = play(
        &g,
        &["go south", "take coupon", "go north", "go east", "go north", "try clothes", "buy clothes", "take clothes"],
    );
    assert!(s.won);
    assert_eq!(s.game_score, 5);
    assert_eq!(g.cs_score(&s).unwrap(), 4.0);
}

#[test]
fn buying_without_coupon_scores_no_coupon_points() {
    let g = game("shopping", GameMode::Test);
    let s = play(&g, &["go east", "go north", "buy clothes", "take clothes"]);
    assert!(s.won);
    assert_eq!(g.cs_score(&s).unwrap(), 0.0);
}

#[test]
fn refused_actions_leave_state_unchanged() {
    let g = game("905", GameMode::Train);
    let (mut s, _) = g.reset(0);
    let before = s.dynamics_key();
    for a in ["go west", "eat pop-tart", "take shower", "dance", "take", "drop keys"] {
        let r = g.step(&mut s, a).unwrap();
        assert!(!r.observation.feedback.is_empty(), "{a}: no refusal text");
        assert_eq!(r.score_delta, 0);
    }
    assert_eq!(s.dynamics_key(), before);
    assert_eq!(s.steps_taken, 6);
}

#[test]
fn unknown_verb_feedback() {
    let g = game("905", GameMode::Train);
    let (mut s, _) = g.reset(0);
    let r = g.step(&mut s, "dance wildly").unwrap();
    assert_eq!(r.observation.feedback, "That's not a verb I recognise.");
    assert!(r.observation.action.is_none());
}

#[test]
fn win_score_is_paid_exactly_once() {
    let g = game("905", GameMode::Train);
    let (mut s, _) = g.reset(0);
    let deltas: Vec<u32> = ["go east", "go south", "go east"]
        .iter()
        .map(|a| g.step(&mut s, a).unwrap().score_delta)
        .collect();
    assert_eq!(deltas, [0, 0, 5]);
    assert!(matches!(g.step(&mut s, "go north"), Err(GameError::SteppedAfterDone)));
    assert_eq!(s.game_score, 5);
}

#[test]
fn step_cap_ends_the_episode() {
    let g = game("905", GameMode::Train);
    let (mut s, _) = g.reset(0);
    let mut last = None;
    for _ in 0..50 {
        last = Some(g.step(&mut s, "examine telephone").unwrap());
    }
    assert!(last.unwrap().done);
    assert!(!s.won);
    assert_eq!(s.steps_taken, 50);
    assert!(g.step(&mut s, "examine telephone").is_err());
}

#[test]
fn cs_is_hidden_in_training_mode() {
    let g = game("905", GameMode::Train);
    let s = play(&g, &["go south", "wash shower"]);
    assert!(matches!(g.cs_score(&s), Err(GameError::QueriedInTrainingMode)));
    let t = game("905", GameMode::Test);
    let s = play(&t, &["go south", "wash shower"]);
    assert_eq!(t.cs_score(&s).unwrap(), 2.0);
}

#[test]
fn persona_scores() {
    let g = game("light_gold", GameMode::Test);
    let (s, _) = g.reset(0);
    assert!(matches!(g.persona_cs_score(&s, Some("pirate")), Err(GameError::UnknownPersona(_))));
    let spec = g.spec();
    assert_eq!(spec.personas(), ["adventurer", "bum", "thief", "thug"]);
    for p in spec.personas() {
        assert!(spec.max_cs(Some(&p)) > 0.0);
        assert_eq!(g.persona_cs_score(&s, Some(&p)).unwrap(), 0.0);
    }
}

#[test]
fn consumed_items_disappear() {
    let g = game("905", GameMode::Train);
    let s = play(&g, &["go east", "go north", "eat pop-tart"]);
    assert!(!s.holds("pop-tart"));
    assert!(s.objects_at("kitchen").is_empty());
    let r = {
        let mut s = s.clone();
        g.step(&mut s, "eat pop-tart").unwrap()
    };
    assert!(!r.observation.action.unwrap().success);
}

#[test]
fn observation_fields() {
    let g = game("905", GameMode::Train);
    let (mut s, obs) = g.reset(0);
    assert_eq!(obs.room, "bedroom");
    assert!(obs.desc.starts_with("I wake up in the morning."));
    assert_eq!(obs.prev_action, "");
    assert_eq!(obs.exits, ["east", "south"]);
    let r = g.step(&mut s, "take keys").unwrap();
    assert_eq!(r.observation.inventory, ["keys"]);
    assert_eq!(r.observation.prev_action, "take keys");
    let rec = r.observation.action.unwrap();
    assert_eq!((rec.verb.as_str(), rec.success), ("take", true));
}

#[test]
fn parser_prefers_longest_alias() {
    let g = game("shopping", GameMode::Train);
    let p = g.parse_action("try on clothes").unwrap();
    assert_eq!(g.spec().templates()[p.template].verb(), "try");
    assert_eq!(p.objects, ["clothes"]);
    let p = g.parse_action("hand money to staff").unwrap();
    assert_eq!(p.objects, ["money", "staff"]);
    assert!(g.parse_action("give money").is_none());
}

#[test]
fn same_actions_same_transcript() {
    let g = game("see_doctor", GameMode::Test);
    let actions = all_actions(g.spec());
    let run = || {
        let (mut s, _) = g.reset(9);
        actions
            .iter()
            .cycle()
            .step_by(7)
            .take(50)
            .map(|a| g.step(&mut s, a).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

const MINIMAL: &str = r#"
[game]
id = "tiny"
title = "Tiny"
start = "a"
win_score = 1

[[rooms]]
name = "a"
description = "Room A."
exits = { north = "b" }

[[rooms]]
name = "b"
description = "Room B."
exits = { south = "a" }

[[templates]]
verbs = ["go"]
arity = 1

[win]
kind = "in_room"
room = "b"
"#;

#[test]
fn minimal_spec_parses() {
    let spec = GameSpec::parse(MINIMAL).unwrap();
    assert_eq!(spec.game.step_cap, 50);
    assert_eq!(spec.game.win_score, 1.0);
    assert_eq!(shortest_win(&spec).unwrap(), ["go north"]);
}

#[test]
fn dangling_exit_is_rejected() {
    let bad = MINIMAL.replace(r#"exits = { north = "b" }"#, r#"exits = { north = "b", east = "nowhere-land" }"#);
    assert!(matches!(GameSpec::parse(&bad), Err(GameError::Validation(_))));
}

#[test]
fn unreachable_win_is_rejected() {
    let bad = MINIMAL.replace(r#"room = "b""#, r#"room = "a""#).replace(
        "[win]",
        "[[objects]]\nname = \"gem\"\nlocation = \"nowhere\"\n\n[win]",
    );
    let bad = bad.replace("kind = \"in_room\"\nroom = \"a\"", "kind = \"in_inventory\"\nitem = \"gem\"");
    assert!(matches!(GameSpec::parse(&bad), Err(GameError::Validation(_))));
}

#[test]
fn malformed_toml_is_a_parse_error() {
    assert!(matches!(GameSpec::parse("[game"), Err(GameError::Parse(_))));
}

#[test]
fn empty_spec_is_rejected() {
    assert!(GameSpec::parse("").is_err());
}
