package com.acme.app;

public class Launcher {

    /** @sketchlink 0cafe001a-0000-4000-8000-00000000001a */
    // selects the runtime profile first
    public Main prepare() {
        return new Main();
    }
}
