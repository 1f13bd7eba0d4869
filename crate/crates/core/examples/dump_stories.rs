//! Frames and story graph of every shipped story fixture.
use kgshape::story::{label_story, load_story, story_to_kg, FrameLexicon};

fn main() {
    let lex = FrameLexicon::builtin();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/stories");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths {
        let doc = load_story(&p).unwrap();
        let (_, skipped) = label_story(&doc, &lex);
        println!("== {} (persona {:?}) skipped {:?}", p.file_name().unwrap().to_string_lossy(), doc.persona, skipped.words);
        match story_to_kg(&doc, &lex) {
            Ok(g) => print!("{}", g.to_tsv()),
            Err(e) => println!("ERR {e}"),
        }
    }
}
