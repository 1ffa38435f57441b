let mocha = require('mocha');
let assert = require('assert');
let mini_pkg = require('mini-pkg');
describe('test suite', function() {
    it('test case', function(done) {
        let zipped = mini_pkg.zip([1, 2], ['a', 'b']);
        assert.deepEqual(zipped, [[1, 'a'], [2, 'b']]);
        done();
})})