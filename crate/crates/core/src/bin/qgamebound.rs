fn main() {
    std::process::exit(qgamebound::cli::main());
}
