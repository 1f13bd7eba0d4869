//! Shortest winning action sequence for every shipped game.
use kgshape::game::{search::shortest_win, GameSpec, SHIPPED_GAMES};

fn main() {
    for (id, _) in SHIPPED_GAMES {
        let t = std::time::Instant::now();
        let spec = GameSpec::shipped(id).unwrap();
        let path = shortest_win(&spec).unwrap();
        println!("{id}: {} steps {:?} ({:?})", path.len(), path, t.elapsed());
    }
}
