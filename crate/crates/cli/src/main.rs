fn main() -> std::process::ExitCode {
    deckadapt::run()
}
