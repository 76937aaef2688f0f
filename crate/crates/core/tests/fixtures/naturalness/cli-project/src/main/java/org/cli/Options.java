package org.cli;

import java.util.LinkedHashMap;
import java.util.Map;

public class Options {
    private final Map<String, String> shortOpts = new LinkedHashMap<>();
    private final Map<String, String> longOpts = new LinkedHashMap<>();

    public Options addOption(String opt, String longOpt, boolean hasArg, String description) {
        if (opt == null || opt.isEmpty()) {
            throw new IllegalArgumentException("option name is required");
        }
        shortOpts.put(opt, description);
        if (longOpt != null) {
            longOpts.put(longOpt, opt);
        }
        return this;
    }

    public boolean hasOption(String opt) {
        return shortOpts.containsKey(opt) || longOpts.containsKey(opt);
    }

    public boolean hasLongOption(String longOpt) {
        return longOpts.containsKey(longOpt);
    }
}
