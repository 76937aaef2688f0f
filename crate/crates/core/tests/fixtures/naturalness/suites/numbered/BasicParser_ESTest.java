package org.cli;

import org.junit.jupiter.api.Test;

import static org.junit.jupiter.api.Assertions.*;

class BasicParser_ESTest {
    @Test
    void test00() {
        BasicParser basicParser0 = new BasicParser();
        Options options0 = new Options();
        String[] stringArray0 = new String[2];
        String[] stringArray1 = basicParser0.flatten(options0, stringArray0, true);
        assertSame(stringArray0, stringArray1);
    }

    @Test
    void test01() {
        BasicParser basicParser0 = new BasicParser();
        String[] stringArray0 = basicParser0.parse(new Options(), new String[0]);
        assertEquals(0, stringArray0.length);
    }
}
