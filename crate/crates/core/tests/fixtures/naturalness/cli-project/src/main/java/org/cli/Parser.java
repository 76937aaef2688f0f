package org.cli;

public abstract class Parser {
    protected abstract String[] flatten(Options options, String[] arguments, boolean stopAtNonOption);

    public String[] parse(Options options, String[] arguments) {
        return flatten(options, arguments, false);
    }
}
