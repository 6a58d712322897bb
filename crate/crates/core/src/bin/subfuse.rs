fn main() {
    std::process::exit(subgroup_fusion::cli::main_with_args(std::env::args_os()));
}
