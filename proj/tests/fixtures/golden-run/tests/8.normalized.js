let mocha = require('mocha');
let assert = require('assert');
let mini_pkg = require('mini-pkg');
describe('test suite', function() {
    it('test case', function(done) {
        let v = mini_pkg.lookup({k: 'v'}, 'k');
        assert.strictEqual(v, 'v');
        done();
    });
});