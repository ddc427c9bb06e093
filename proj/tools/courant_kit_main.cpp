// Placeholder CLI entry point; subcommands are filled in as modules land.
int main() { return 0; }
