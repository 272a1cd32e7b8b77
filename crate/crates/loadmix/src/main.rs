fn main() {
    std::process::exit(loadmix::run(std::env::args_os()));
}
