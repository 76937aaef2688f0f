package org.cli;

import org.junit.jupiter.api.Test;

import static org.junit.jupiter.api.Assertions.*;

class OptionsTest {
    @Test
    void test_addOption_longArgs_throwsException() {
        Options options = new Options();
        assertThrows(IllegalArgumentException.class, () -> options.addOption("", "long-args", true, "broken"));
    }

    @Test
    void testHasLongOption() {
        Options options = new Options().addOption("v", "verbose", false, "print more");
        assertTrue(options.hasLongOption("verbose"));
    }
}
